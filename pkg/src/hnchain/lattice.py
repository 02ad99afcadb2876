"""Model Hamiltonians and their closed-form dispersions.

Two lattices are covered: the non-reciprocal single-band chain with one
onsite impurity (hoppings t_L to the left neighbor, t_R to the right,
impurity strength delta on site l, open or periodic ends), and its two-band
extension with alternating intracell hoppings t1 +/- gamma and intercell
hopping t2 (open ends only). Sites are 1-based throughout, matching the
j = 1..N conventions of the closed-form machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .precision import hpc

OBC = "obc"
PBC = "pbc"


def _nonzero(value, name: str) -> None:
    if hpc(value) == 0:
        raise ValueError(f"{name} must be nonzero")


@dataclass(frozen=True)
class ChainSpec:
    """Finite non-reciprocal chain with a single onsite impurity.

    Hopping/impurity values may be ints, floats, decimal strings, mpf/mpc or
    (re, im) pairs; strings are parsed at the active working precision when
    the spec is consumed, so one spec serves every precision.
    """

    n_sites: int
    t_left: object = 1
    t_right: object = 1
    delta: object = 0
    impurity_site: int = 1
    boundary: str = OBC

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError(f"n_sites must be >= 2, got {self.n_sites}")
        if not 1 <= self.impurity_site <= self.n_sites:
            raise ValueError(
                f"impurity_site must lie in [1, {self.n_sites}], got {self.impurity_site}"
            )
        if self.boundary not in (OBC, PBC):
            raise ValueError(f"boundary must be 'obc' or 'pbc', got {self.boundary!r}")
        _nonzero(self.t_left, "t_left")
        _nonzero(self.t_right, "t_right")

    @property
    def tL(self) -> mp.mpc:
        return hpc(self.t_left)

    @property
    def tR(self) -> mp.mpc:
        return hpc(self.t_right)

    @property
    def dlt(self) -> mp.mpc:
        return hpc(self.delta)


@dataclass(frozen=True)
class SSHSpec:
    """Two-band non-reciprocal chain: n_cells dimers, impurity on one site."""

    n_cells: int
    t1: object = 1
    t2: object = 1
    gamma: object = 0
    delta: object = 0
    impurity_cell: int = 1
    impurity_sublattice: str = "A"

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError(f"n_cells must be >= 2, got {self.n_cells}")
        if not 1 <= self.impurity_cell <= self.n_cells:
            raise ValueError(
                f"impurity_cell must lie in [1, {self.n_cells}], got {self.impurity_cell}"
            )
        if self.impurity_sublattice not in ("A", "B"):
            raise ValueError(
                f"impurity_sublattice must be 'A' or 'B', got {self.impurity_sublattice!r}"
            )
        _nonzero(self.t2, "t2")

    @property
    def n_sites(self) -> int:
        return 2 * self.n_cells

    @property
    def impurity_site(self) -> int:
        base = 2 * (self.impurity_cell - 1)
        return base + (1 if self.impurity_sublattice == "A" else 2)


@dataclass(frozen=True)
class DenseMatrix:
    """Immutable dense matrix of high-precision complex entries."""

    dim: int
    entries: tuple

    def at(self, i: int, j: int) -> mp.mpc:
        """0-based entry access."""
        return self.entries[i][j]

    def to_numpy(self) -> np.ndarray:
        out = np.empty((self.dim, self.dim), dtype=complex)
        for i in range(self.dim):
            for j in range(self.dim):
                out[i, j] = complex(self.entries[i][j])
        return out

    def max_row_sum(self) -> mp.mpf:
        return max(mp.fsum(abs(v) for v in row) for row in self.entries)

    def trace(self) -> mp.mpc:
        return mp.fsum(self.entries[i][i] for i in range(self.dim))

    def transpose(self) -> "DenseMatrix":
        ent = tuple(
            tuple(self.entries[j][i] for j in range(self.dim)) for i in range(self.dim)
        )
        return DenseMatrix(self.dim, ent)


def _zeros(n: int):
    return [[mp.mpc(0) for _ in range(n)] for _ in range(n)]


def _freeze(rows) -> DenseMatrix:
    return DenseMatrix(len(rows), tuple(tuple(row) for row in rows))


def build_hatano_nelson(spec: ChainSpec) -> DenseMatrix:
    """Assemble the chain matrix at the active precision.

    M[j][j+1] = t_L and M[j+1][j] = t_R along the chain, delta on the
    impurity site; periodic ends add M[N][1] = t_L and M[1][N] = t_R so
    the closing bond is oriented like the bulk ones.
    """
    n = spec.n_sites
    tL, tR, delta = spec.tL, spec.tR, spec.dlt
    rows = _zeros(n)
    for j in range(n - 1):
        rows[j][j + 1] += tL
        rows[j + 1][j] += tR
    rows[spec.impurity_site - 1][spec.impurity_site - 1] += delta
    if spec.boundary == PBC:
        rows[n - 1][0] += tL
        rows[0][n - 1] += tR
    return _freeze(rows)


def build_nr_ssh(spec: SSHSpec) -> DenseMatrix:
    """Assemble the two-band chain (open ends) in the (a1, b1, a2, b2, ...) basis.

    Within a cell the a->b matrix element is t1+gamma and b->a is t1-gamma;
    neighboring cells couple through t2 in both directions; the impurity adds
    delta on the chosen sublattice site of its cell.
    """
    n = spec.n_sites
    t1, t2, gamma, delta = hpc(spec.t1), hpc(spec.t2), hpc(spec.gamma), hpc(spec.delta)
    rows = _zeros(n)
    for c in range(spec.n_cells):
        a, b = 2 * c, 2 * c + 1
        rows[a][b] += t1 + gamma
        rows[b][a] += t1 - gamma
        if c + 1 < spec.n_cells:
            a_next = 2 * (c + 1)
            rows[a_next][b] += t2
            rows[b][a_next] += t2
    rows[spec.impurity_site - 1][spec.impurity_site - 1] += delta
    return _freeze(rows)


def sqrt_hopping_product(spec: ChainSpec) -> mp.mpc:
    """Principal square root of t_L*t_R; the single branch used everywhere."""
    return mp.sqrt(spec.tL * spec.tR)


def dispersion_obc(kd, spec: ChainSpec) -> mp.mpc:
    """Open-chain dispersion E(kd) = 2*sqrt(t_L t_R)*cos(kd)."""
    return 2 * sqrt_hopping_product(spec) * mp.cos(mp.mpc(kd))


def dispersion_pbc(qd, spec: ChainSpec) -> mp.mpc:
    """Ring dispersion E(qd) = (t_L+t_R)cos(qd) + i(t_L-t_R)sin(qd)."""
    q = mp.mpc(qd)
    return (spec.tL + spec.tR) * mp.cos(q) + mp.mpc(0, 1) * (spec.tL - spec.tR) * mp.sin(q)


def ssh_bloch_spectrum(kappa, spec: SSHSpec):
    """Both Bloch bands +/- sqrt((t1^2-g^2) + t2^2 + 2 t1 t2 cos k + 2i t2 g sin k)."""
    t1, t2, g = hpc(spec.t1), hpc(spec.t2), hpc(spec.gamma)
    k = mp.mpc(kappa)
    inner = (t1 * t1 - g * g) + t2 * t2 + 2 * t1 * t2 * mp.cos(k) \
        + 2 * mp.mpc(0, 1) * t2 * g * mp.sin(k)
    root = mp.sqrt(inner)
    return root, -root


# --- JSON (de)serialization -------------------------------------------------
#
# Schema: {"N", "tL": [re, im], "tR": [re, im], "delta": [re, im], "l", "bc"}
# and    {"cells", "t1", "t2", "gamma", "delta", "cell", "sublattice"}.
# re/im components are JSON numbers when exactly representable in a double,
# decimal strings otherwise, so values round-trip at any configured precision.


def _num_out(x: mp.mpf):
    as_float = float(x)
    if mp.mpf(as_float) == x:
        return as_float
    return mp.nstr(x, int(mp.mp.prec / 3.32) + 3)


def _pair_out(value):
    z = hpc(value)
    return [_num_out(z.real), _num_out(z.imag)]


def _pair_in(obj):
    if isinstance(obj, (list, tuple)):
        if len(obj) != 2:
            raise ValueError(f"complex value must be a [re, im] pair, got {obj!r}")
        return mp.mpc(mp.mpmathify(obj[0]), mp.mpmathify(obj[1]))
    return mp.mpc(mp.mpmathify(obj))


def chain_to_json(spec: ChainSpec) -> dict:
    return {
        "N": spec.n_sites,
        "tL": _pair_out(spec.t_left),
        "tR": _pair_out(spec.t_right),
        "delta": _pair_out(spec.delta),
        "l": spec.impurity_site,
        "bc": spec.boundary,
    }


def chain_from_json(obj: dict) -> ChainSpec:
    return ChainSpec(
        n_sites=int(obj["N"]),
        t_left=_pair_in(obj["tL"]),
        t_right=_pair_in(obj["tR"]),
        delta=_pair_in(obj.get("delta", 0)),
        impurity_site=int(obj.get("l", 1)),
        boundary=str(obj.get("bc", OBC)),
    )


def ssh_to_json(spec: SSHSpec) -> dict:
    return {
        "cells": spec.n_cells,
        "t1": _pair_out(spec.t1),
        "t2": _pair_out(spec.t2),
        "gamma": _pair_out(spec.gamma),
        "delta": _pair_out(spec.delta),
        "cell": spec.impurity_cell,
        "sublattice": spec.impurity_sublattice,
    }


def ssh_from_json(obj: dict) -> SSHSpec:
    return SSHSpec(
        n_cells=int(obj["cells"]),
        t1=_pair_in(obj["t1"]),
        t2=_pair_in(obj["t2"]),
        gamma=_pair_in(obj.get("gamma", 0)),
        delta=_pair_in(obj.get("delta", 0)),
        impurity_cell=int(obj.get("cell", 1)),
        impurity_sublattice=str(obj.get("sublattice", "A")),
    )
