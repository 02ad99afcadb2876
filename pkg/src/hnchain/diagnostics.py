"""Skin-effect observables, impurity-mode detection, phase scans, winding.

The quantities here sit on top of the exact-diagonalization engine: the
aggregate skin-effect weight per site, identification of the impurity mode,
the amplitude gradient at the impurity used to map out where the mode is
flat (counter skin-effect), spectral winding of the ring dispersion, and the
fragmentation consistency check in the strong-impurity limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .lattice import ChainSpec, OBC, SSHSpec, build_hatano_nelson, dispersion_pbc
from .precision import PrecisionConfig, hpc
from .profile import ModeProfile
from .spectral import ConvergenceError, Spectrum, full_spectrum

SCAN_SENTINEL = -999.0  # flagged cells; real values are bounded below by ln(1e-5)


@dataclass(frozen=True)
class PhaseScan:
    """Gradient diagnostic on a (hopping ratio, wrapped impurity) grid.

    ``values[i][j]`` belongs to delta_axis[i], ratio_axis[j]; flagged cells
    (no impurity mode, convergence failure, invalid spec) carry
    SCAN_SENTINEL in values and 1 in flags.
    """

    ratio_axis: tuple
    delta_axis: tuple
    values: tuple
    flags: tuple
    x: int = 1

    def rows(self):
        """CSV-ready (ratio, delta, value, flag) tuples in row-major order."""
        for i, d in enumerate(self.delta_axis):
            for j, r in enumerate(self.ratio_axis):
                yield r, d, self.values[i][j], self.flags[i][j]


def nhse_profile(spectrum: Spectrum, squared: bool = True) -> ModeProfile:
    """Aggregate weight W_j = sum_n |psi_R,j|^2 over all right eigenvectors.

    With L2-normalized modes the total is the site count. ``squared=False``
    gives the sum of magnitudes instead, a rendering convention some plots
    prefer; the squared form is the contractual one.
    """
    n = len(spectrum.right_vectors[0].amplitudes)
    acc = [mp.mpf(0)] * n
    for vec in spectrum.right_vectors:
        for j, a in enumerate(vec.amplitudes):
            acc[j] += abs(a) ** 2 if squared else abs(a)
    return ModeProfile(tuple(mp.mpc(v) for v in acc), "aggregate", None)


def find_impurity_mode(spectrum: Spectrum, spec) -> tuple:
    """Pick the eigenpair with maximal weight on the impurity site.

    Ties within the residual tolerance are broken by smaller |E - delta|.
    Works for both chain and two-band specs (the impurity site index comes
    from the spec). Requires delta != 0; without an impurity no mode is
    distinguished.
    """
    if isinstance(spec, (ChainSpec, SSHSpec)):
        site = spec.impurity_site
        delta = hpc(spec.delta)
    else:
        raise TypeError(f"unsupported spec type {type(spec).__name__}")
    if delta == 0:
        raise ValueError("no impurity mode is defined for delta = 0")
    j = site - 1
    weights = [abs(v.amplitudes[j]) ** 2 for v in spectrum.right_vectors]
    best = max(range(len(weights)), key=lambda i: weights[i])
    top = weights[best]
    tie_tol = max(10 * max(spectrum.residuals), mp.mpf(2) ** (-(mp.mp.prec // 2)) * top)
    candidates = [i for i in range(len(weights)) if top - weights[i] <= tie_tol]
    if len(candidates) > 1:
        best = min(candidates, key=lambda i: abs(spectrum.eigenvalues[i] - delta))
    return best, spectrum.right_vectors[best]


def gradient_Dx(profile: ModeProfile, l: int, x: int) -> mp.mpf:
    """Amplitude gradient (|psi_l| - |psi_{l+x}|)/x at the impurity site."""
    if x == 0:
        raise ValueError("x must be a nonzero integer")
    n = len(profile.amplitudes)
    if not (1 <= l <= n and 1 <= l + x <= n):
        raise ValueError(f"sites l={l}, l+x={l + x} must lie in [1, {n}]")
    return (abs(profile.amplitudes[l - 1]) - abs(profile.amplitudes[l + x - 1])) / x


def resolution_transform(d) -> mp.mpf:
    """ln(1e-5 + |d|): log-resolved gradient with a floor at ln(1e-5)."""
    d = mp.mpf(d) if not isinstance(d, mp.mpc) else abs(d)
    if not mp.isfinite(d):
        raise ValueError("gradient value must be finite")
    return mp.log(mp.mpf("1e-5") + abs(d))


def delta_wrap(delta, t_left, t_right) -> mp.mpc:
    """delta for t_L t_R > 0, i*delta for t_L t_R < 0.

    The wrap keeps the spectrum's real/imaginary-axis structure intact when
    the hopping product changes sign, so one scan can cross t_R/t_L = 0.
    """
    prod = hpc(t_left) * hpc(t_right)
    if prod.imag != 0 or prod.real == 0:
        raise ValueError("t_L t_R must be real and nonzero for the wrap")
    d = mp.mpf(delta)
    return mp.mpc(d) if prod.real > 0 else mp.mpc(0, d)


def _linspace(lo: float, hi: float, count: int):
    if count < 2:
        raise ValueError("resolution must be >= 2 per axis")
    step = (hi - lo) / (count - 1)
    return tuple(lo + k * step for k in range(count))


def _scan_cell(n_sites, l, ratio, delta, x, cfg):
    if ratio == 0.0 or delta == 0.0:
        return SCAN_SENTINEL, 1
    try:
        wrapped = delta_wrap(delta, 1, ratio)
        spec = ChainSpec(n_sites, 1, ratio, wrapped, l, OBC)
        matrix = build_hatano_nelson(spec)
        seeds = sorted(np.linalg.eigvals(matrix.to_numpy()), key=lambda z: (z.real, z.imag))
        try:
            spectrum = full_spectrum(matrix, cfg, seeds=[mp.mpc(z) for z in seeds])
            trace_gap = abs(mp.fsum(spectrum.eigenvalues) - matrix.trace())
            if trace_gap > 1000 * cfg.eps * (1 + matrix.max_row_sum()):
                raise ConvergenceError("warm-started roots lost trace consistency")
        except ConvergenceError:
            spectrum = full_spectrum(matrix, cfg)
        _, mode = find_impurity_mode(spectrum, spec)
        value = resolution_transform(gradient_Dx(mode, l, x))
        return float(value), 0
    except (ConvergenceError, ValueError):
        return SCAN_SENTINEL, 1


def phase_scan(n_sites: int, l: int, ratio_range, delta_range, resolution,
               x: int, cfg: PrecisionConfig | None = None) -> PhaseScan:
    """Impurity-mode gradient diagnostic over a (t_R/t_L, delta) grid.

    Each cell builds the chain at t_L = 1, t_R = ratio with the wrapped
    impurity strength, diagonalizes it, locates the impurity mode and stores
    ln(1e-5 + |D_x|). Cells that cannot produce a value (delta = 0, ratio = 0,
    convergence failure) are flagged, never fatal. Output is row-major over
    (delta, ratio), deterministic.
    """
    if x not in (1, -1):
        raise ValueError("the gradient diagnostic is defined for x = +1 or -1")
    cfg = cfg or PrecisionConfig(bits=128, tol="1e-20")
    ratios = _linspace(float(ratio_range[0]), float(ratio_range[1]), int(resolution[0]))
    deltas = _linspace(float(delta_range[0]), float(delta_range[1]), int(resolution[1]))
    values, flags = [], []
    with cfg.context():
        for d in deltas:
            row_v, row_f = [], []
            for r in ratios:
                v, f = _scan_cell(n_sites, l, r, d, x, cfg)
                row_v.append(v)
                row_f.append(f)
            values.append(tuple(row_v))
            flags.append(tuple(row_f))
    return PhaseScan(ratio_axis=ratios, delta_axis=deltas,
                     values=tuple(values), flags=tuple(flags), x=x)


def winding_of_curve(points, base_point) -> int:
    """Accumulated-argument winding of a sampled closed curve about a point."""
    b = mp.mpc(base_point)
    total = mp.mpf(0)
    m = len(points)
    for k in range(m):
        z0 = points[k] - b
        z1 = points[(k + 1) % m] - b
        total += mp.arg(z1 / z0)
    return int(mp.nint(total / (2 * mp.pi)))


def winding_number(spec: ChainSpec, base_point, n_samples: int = 64,
                   tol=None, max_doublings: int = 16) -> int:
    """Winding of the ring dispersion E(qd), qd in [0, 2pi), about base_point.

    Orientation: positive qd traversal; for t_R > t_L > 0 the curve runs
    clockwise and the winding about the origin is -1. Sample count doubles
    until two consecutive estimates agree. A curve point within ``tol`` of
    the base point raises a degenerate-curve error.
    """
    if n_samples < 4:
        raise ValueError("need at least 4 samples")
    tol = mp.mpf(tol) if tol is not None else mp.mpf(2) ** (8 - mp.mp.prec) * (
        1 + abs(spec.tL) + abs(spec.tR))
    b = mp.mpc(base_point)
    prev = None
    count = int(n_samples)
    for _ in range(max_doublings):
        pts = []
        for k in range(count):
            e = dispersion_pbc(2 * mp.pi * k / count, spec)
            if abs(e - b) <= tol:
                raise ValueError(
                    f"spectral curve passes within {mp.nstr(tol, 3)} of the base point"
                )
            pts.append(e)
        w = winding_of_curve(pts, b)
        if prev is not None and w == prev:
            return w
        prev = w
        count *= 2
    raise ConvergenceError("winding estimate did not stabilize under sample doubling")


def tail_flatness(profile: ModeProfile, l: int, side: int = 1, rel_tol: float = 0.05,
                  stride: int = 1, offset: int = 0):
    """(is_flat, relative deviation) of the impurity-mode tail.

    Flatness is max_j ||psi_j| - median| / median over the window two sites
    away from both the impurity and the chain end: j in [l+2, N-2] for
    side=+1, j in [3, l-2] for side=-1. ``stride``/``offset`` restrict the
    window to every stride-th site (used per sublattice on two-band chains).
    """
    n = len(profile.amplitudes)
    if side == 1:
        window = list(range(l + 2, n - 1))
    elif side == -1:
        window = list(range(3, l - 1))
    else:
        raise ValueError("side must be +1 or -1")
    if not window:
        raise ValueError("flatness window is empty for this geometry")
    mags = [abs(profile.amplitudes[j - 1]) for j in window
            if (j - window[0]) % stride == offset]
    if len(mags) < 2:
        raise ValueError("flatness window is empty for this geometry")
    med = sorted(mags)[len(mags) // 2]
    if med == 0:
        return False, float("inf")
    dev = float(max(abs(m - med) for m in mags) / med)
    return dev < rel_tol, dev


def ssh_tail_flatness(profile: ModeProfile, spec: SSHSpec, rel_tol: float = 0.10):
    """(is_flat, deviation) for a two-band impurity mode, best side.

    The lattice unit of the two-band chain is the cell, so the margins are
    counted in cells: windows [cell+2, n_cells-2] and [3, cell-2]. A and B
    sublattices carry different amplitudes (a relative phase/magnitude is
    intrinsic), so the deviation is taken per sublattice and the worse of
    the two decides; the better of the two sides is reported.
    """
    cells = spec.n_cells
    m = spec.impurity_cell
    best = float("inf")
    for window in (range(m + 2, cells - 1), range(3, m - 1)):
        cells_in = list(window)
        if len(cells_in) < 2:
            continue
        side_dev = 0.0
        for off in (0, 1):
            mags = [abs(profile.amplitudes[2 * (c - 1) + off]) for c in cells_in]
            med = sorted(mags)[len(mags) // 2]
            if med == 0:
                side_dev = float("inf")
                break
            side_dev = max(side_dev, float(max(abs(v - med) for v in mags) / med))
        best = min(best, side_dev)
    if best == float("inf") and not any(
        len(list(w)) >= 2 for w in (range(m + 2, cells - 1), range(3, m - 1))
    ):
        raise ValueError("flatness windows are empty for this geometry")
    return best < rel_tol, best


def fragmentation_check(spec_big: ChainSpec, cfg: PrecisionConfig) -> dict:
    """Compare the strong-impurity chain against its pristine fragments.

    Computes the aggregate skin-effect profile of the full chain and of the
    two impurity-free sub-chains (sites 1..l-1 and l+1..N), and reports
    sitewise relative deviations plus the aggregate weight on the impurity
    site itself (which tends to 1: only the trapped mode lives there).
    """
    if spec_big.boundary != OBC:
        raise ValueError("fragmentation check is defined for open chains")
    n, l = spec_big.n_sites, spec_big.impurity_site
    with cfg.context():
        full = nhse_profile(full_spectrum(build_hatano_nelson(spec_big), cfg))
        report = {
            "n_sites": n,
            "impurity_site": l,
            "impurity_site_weight": float(abs(full.amplitudes[l - 1])),
            "left": None,
            "right": None,
        }
        for side, lo, hi in (("left", 1, l - 1), ("right", l + 1, n)):
            length = hi - lo + 1
            if length < 1:
                continue
            if length == 1:
                frag_w = [mp.mpf(1)]
            else:
                frag_spec = ChainSpec(length, spec_big.t_left, spec_big.t_right, 0, 1, OBC)
                frag = nhse_profile(full_spectrum(build_hatano_nelson(frag_spec), cfg))
                frag_w = [abs(a) for a in frag.amplitudes]
            devs = []
            for off in range(length):
                w_full = abs(full.amplitudes[lo - 1 + off])
                devs.append(float(abs(w_full - frag_w[off]) / frag_w[off]))
            report[side] = {
                "sites": [lo + off for off in range(length)],
                "relative_deviation": devs,
                "max_relative_deviation": max(devs),
            }
        return report
