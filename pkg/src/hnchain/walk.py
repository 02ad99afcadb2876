"""Discrete-time walk on a finite line with a biased, generally non-unitary coin.

One step applies the coin to the two-component internal state on every site
and then shifts the right component one site right and the left component one
site left (amplitudes shifted off the lattice are dropped: absorbing edges).
When the right/left probabilities r and ell differ, the coin is non-unitary
and the evolution gains or loses norm, mimicking non-reciprocal hopping. A
site-local modification of the coin plays the impurity: an overall factor
(M1), a phase (M2), or an asymmetric gain/loss pair (M3).

Amplitudes are numpy complex128 by default; pass bits= to evolve at extended
precision through the same interface (object arrays of mpmath numbers).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath as mp
import numpy as np


@dataclass(frozen=True)
class CoinSpec:
    """Biased coin [[sqrt(r), sqrt(1-r)], [sqrt(1-ell), -sqrt(ell)]].

    r, ell in [0, 1]; the coin is unitary exactly when r = ell.
    """

    r: float = 0.5
    ell: float = 0.5

    def __post_init__(self):
        if not 0 <= self.r <= 1:
            raise ValueError(f"r must lie in [0, 1], got {self.r}")
        if not 0 <= self.ell <= 1:
            raise ValueError(f"ell must lie in [0, 1], got {self.ell}")


@dataclass(frozen=True)
class ImpuritySpec:
    """Site-local coin modification: one of the models M1/M2/M3, or none.

    M1 scales the coin by gamma in [0, 1]; M2 multiplies it by e^(i phi);
    M3 applies diag(sqrt(gamma_r), sqrt(gamma_l)) in front (gain/loss).
    """

    model: str = "none"
    site: int = 0
    gamma: float = 1.0
    phi: float = 0.0
    gamma_r: float = 1.0
    gamma_l: float = 1.0

    def __post_init__(self):
        if self.model not in ("none", "M1", "M2", "M3"):
            raise ValueError(f"unknown impurity model {self.model!r}")
        if self.model == "M1" and not 0 <= self.gamma <= 1:
            raise ValueError(f"M1 gamma must lie in [0, 1], got {self.gamma}")
        if self.model == "M2" and not 0 <= self.phi < 2 * np.pi:
            raise ValueError(f"M2 phi must lie in [0, 2 pi), got {self.phi}")
        if self.model == "M3" and (self.gamma_r <= 0 or self.gamma_l <= 0):
            raise ValueError("M3 gain/loss factors must be positive")


@dataclass(frozen=True)
class WalkState:
    """Position-by-coin amplitude table plus the norm history of the run."""

    amplitudes: np.ndarray  # shape (L, 2): [:, 0] right, [:, 1] left
    step_count: int = 0
    norm_trace: tuple = field(default_factory=tuple)

    @classmethod
    def point_start(cls, length: int, site: int, coin_state=(1.0, 0.0)) -> "WalkState":
        if not 0 <= site < length:
            raise ValueError(f"start site {site} outside lattice [0, {length})")
        amps = np.zeros((length, 2), dtype=complex)
        amps[site, 0] = coin_state[0]
        amps[site, 1] = coin_state[1]
        state = cls(amplitudes=amps, step_count=0)
        return cls(amplitudes=amps, step_count=0, norm_trace=(state.norm(),))

    @property
    def length(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        if self.amplitudes.dtype == object:
            return float(mp.sqrt(mp.fsum(abs(a) ** 2 for a in self.amplitudes.ravel())))
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))


def build_coin(coin: CoinSpec) -> np.ndarray:
    r, ell = coin.r, coin.ell
    return np.array(
        [
            [np.sqrt(r), np.sqrt(1 - r)],
            [np.sqrt(1 - ell), -np.sqrt(ell)],
        ],
        dtype=complex,
    )


def site_coin(coin: CoinSpec, imp: ImpuritySpec, x: int) -> np.ndarray:
    """The coin acting at site x: modified at the impurity, plain elsewhere."""
    c = build_coin(coin)
    if imp.model == "none" or x != imp.site:
        return c
    if imp.model == "M1":
        return imp.gamma * c
    if imp.model == "M2":
        return np.exp(1j * imp.phi) * c
    return np.diag([np.sqrt(imp.gamma_r), np.sqrt(imp.gamma_l)]).astype(complex) @ c


def step(state: WalkState, coin: CoinSpec, imp: ImpuritySpec = ImpuritySpec()) -> WalkState:
    """One walk step: site-dependent coin, then the conditional shift.

    The coin mixes (R, L) on every site; the shift moves R-amplitude from x
    to x+1 and L-amplitude from x to x-1, dropping whatever leaves the
    lattice. The norm is never rescaled; non-unitary coins gain or lose.
    """
    amps = state.amplitudes
    length = amps.shape[0]
    if amps.dtype == object:
        c = _coin_mp(coin)
        mixed = np.empty_like(amps)
        for x in range(length):
            cx = c if (imp.model == "none" or x != imp.site) else _site_coin_mp(coin, imp)
            mixed[x, 0] = cx[0][0] * amps[x, 0] + cx[0][1] * amps[x, 1]
            mixed[x, 1] = cx[1][0] * amps[x, 0] + cx[1][1] * amps[x, 1]
        shifted = np.empty_like(amps)
        for x in range(length):
            shifted[x, 0] = mixed[x - 1, 0] if x >= 1 else mp.mpc(0)
            shifted[x, 1] = mixed[x + 1, 1] if x + 1 < length else mp.mpc(0)
    else:
        c = build_coin(coin)
        mixed = amps @ c.T
        if imp.model != "none" and 0 <= imp.site < length:
            cx = site_coin(coin, imp, imp.site)
            mixed[imp.site] = cx @ amps[imp.site]
        shifted = np.zeros_like(mixed)
        shifted[1:, 0] = mixed[:-1, 0]
        shifted[:-1, 1] = mixed[1:, 1]
    new = WalkState(amplitudes=shifted, step_count=state.step_count + 1,
                    norm_trace=state.norm_trace)
    nrm = new.norm()
    if amps.dtype != object and not np.isfinite(nrm):
        raise OverflowError(
            "walk amplitudes overflowed double precision; rerun with bits= or fewer steps"
        )
    return WalkState(amplitudes=shifted, step_count=new.step_count,
                     norm_trace=state.norm_trace + (nrm,))


def _coin_mp(coin: CoinSpec):
    r, ell = mp.mpf(coin.r), mp.mpf(coin.ell)
    return [
        [mp.sqrt(r), mp.sqrt(1 - r)],
        [mp.sqrt(1 - ell), -mp.sqrt(ell)],
    ]


def _site_coin_mp(coin: CoinSpec, imp: ImpuritySpec):
    c = _coin_mp(coin)
    if imp.model == "M1":
        g = mp.mpf(imp.gamma)
        return [[g * v for v in row] for row in c]
    if imp.model == "M2":
        ph = mp.expj(mp.mpf(imp.phi))
        return [[ph * v for v in row] for row in c]
    gr, gl = mp.sqrt(mp.mpf(imp.gamma_r)), mp.sqrt(mp.mpf(imp.gamma_l))
    return [[gr * c[0][0], gr * c[0][1]], [gl * c[1][0], gl * c[1][1]]]


def evolve(initial: WalkState, steps: int, coin: CoinSpec,
           imp: ImpuritySpec = ImpuritySpec(), bits: int | None = None) -> WalkState:
    """Apply ``steps`` walk steps; the returned state carries the norm trace."""
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    state = initial
    if bits is not None:
        with mp.workprec(int(bits)):
            amps = np.empty(initial.amplitudes.shape, dtype=object)
            for x in range(initial.length):
                amps[x, 0] = mp.mpc(initial.amplitudes[x, 0])
                amps[x, 1] = mp.mpc(initial.amplitudes[x, 1])
            state = WalkState(amps, initial.step_count, initial.norm_trace)
            for _ in range(steps):
                state = step(state, coin, imp)
            return state
    for _ in range(steps):
        state = step(state, coin, imp)
    return state


def position_distribution(state: WalkState, normalized: bool = False):
    """p(x) = |amp(x, R)|^2 + |amp(x, L)|^2, optionally normalized to sum 1."""
    amps = state.amplitudes
    if amps.dtype == object:
        p = np.array([float(abs(amps[x, 0]) ** 2 + abs(amps[x, 1]) ** 2)
                      for x in range(amps.shape[0])])
    else:
        p = np.abs(amps[:, 0]) ** 2 + np.abs(amps[:, 1]) ** 2
    if normalized:
        total = p.sum()
        if total == 0:
            raise ValueError("cannot normalize a zero-norm state")
        p = p / total
    return p


def mean_position(state: WalkState) -> float:
    p = position_distribution(state, normalized=True)
    return float(np.sum(np.arange(len(p)) * p))
