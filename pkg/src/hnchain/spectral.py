"""High-precision eigensolver for banded-plus-corner matrices.

This is the numerical oracle of the package: eigenvalues come from
Aberth-Ehrlich simultaneous root iteration on the characteristic polynomial
(evaluated by the stable leading-principal-minor recursion, never through
explicit coefficients, which cancel catastrophically for N >~ 30), and
eigenvectors from inverse iteration at the converged roots. Everything runs
at the precision of the supplied PrecisionConfig.

qr_reference is the deliberate counterexample: an ordinary double-precision
Hessenberg + shifted-QR solver without balancing, kept to document how
badly fixed-precision solvers can fail on strongly non-normal chains.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .lattice import DenseMatrix
from .precision import PrecisionConfig
from .profile import ModeProfile, normalize_phase


class ConvergenceError(RuntimeError):
    """An iterative stage failed to reach its tolerance."""


@dataclass(frozen=True)
class Spectrum:
    """Paired eigenvalues/eigenvectors, sorted by (Re, Im).

    ``residuals[n]`` is max(|M psi_R - E psi_R|/|psi_R|, |M^T psi_L - E psi_L|/|psi_L|)
    for the n-th pair. Left vectors satisfy M^T psi_L = E psi_L (same E, no
    conjugation), so biorthogonality is the bilinear pairing
    sum_j psi_L[j]*psi_R[j] without conjugation.
    """

    eigenvalues: tuple
    right_vectors: tuple
    left_vectors: tuple
    residuals: tuple

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def to_json(self, digits: int | None = None) -> dict:
        def num(x):
            f = float(x)
            if digits is None and mp.mpf(f) == x:
                return f
            return mp.nstr(mp.mpf(x), digits or int(mp.mp.prec / 3.32) + 3)

        def cpair(z):
            return [num(z.real), num(z.imag)]

        return {
            "eigenvalues": [cpair(e) for e in self.eigenvalues],
            "residuals": [num(r) for r in self.residuals],
            "right": [[cpair(a) for a in v.amplitudes] for v in self.right_vectors],
            "left": [[cpair(a) for a in v.amplitudes] for v in self.left_vectors],
        }


# --- characteristic polynomial ----------------------------------------------


class _BandedChar:
    """det(M - E I) and d/dE det(M - E I) for a tridiagonal +/- corner matrix.

    Minor recursion D_j = (m_jj - E) D_{j-1} - m_{j,j-1} m_{j-1,j} D_{j-2};
    periodic corners enter through the rank-correction expansion
    det = D_N - tr*bl*D_int + (-1)^(N+1) (tr*prod(sub) + bl*prod(sup)),
    where D_int is the minor over rows/cols 2..N-1. The corner terms carry no
    E-dependence, so the derivative only needs D'_N and D'_int.
    """

    def __init__(self, matrix: DenseMatrix):
        n = matrix.dim
        ent = matrix.entries
        self.n = n
        self.diag = [ent[i][i] for i in range(n)]
        self.sup = [ent[i][i + 1] for i in range(n - 1)]
        self.sub = [ent[i + 1][i] for i in range(n - 1)]
        self.tr = ent[0][n - 1] if n >= 3 else mp.mpc(0)
        self.bl = ent[n - 1][0] if n >= 3 else mp.mpc(0)
        for i in range(n):
            for j in range(n):
                if abs(i - j) <= 1:
                    continue
                if n >= 3 and (i, j) in ((0, n - 1), (n - 1, 0)):
                    continue
                if ent[i][j] != 0:
                    raise ValueError(
                        f"matrix is not tridiagonal-plus-corner: nonzero entry at ({i}, {j})"
                    )
        self.offprod = [self.sup[i] * self.sub[i] for i in range(n - 1)]
        self.has_corners = self.tr != 0 or self.bl != 0
        if self.has_corners:
            prod_sub = mp.fprod(self.sub)
            prod_sup = mp.fprod(self.sup)
            sign = 1 if (n + 1) % 2 == 0 else -1
            self.corner_const = sign * (self.tr * prod_sub + self.bl * prod_sup)
            self.corner_cross = self.tr * self.bl

    def _minor_chain(self, E, lo: int, hi: int):
        """(D, D') over diagonal indices lo..hi-1; empty range gives (1, 0)."""
        dm2, dm1 = mp.mpc(0), mp.mpc(1)
        pm2, pm1 = mp.mpc(0), mp.mpc(0)
        for j in range(lo, hi):
            a = self.diag[j] - E
            off = self.offprod[j - 1] if j > lo else mp.mpc(0)
            d = a * dm1 - off * dm2
            p = -dm1 + a * pm1 - off * pm2
            dm2, dm1 = dm1, d
            pm2, pm1 = pm1, p
        return dm1, pm1

    def eval(self, E):
        E = mp.mpc(E)
        det, ddet = self._minor_chain(E, 0, self.n)
        if self.has_corners:
            dint, pint = self._minor_chain(E, 1, self.n - 1)
            det = det - self.corner_cross * dint + self.corner_const
            ddet = ddet - self.corner_cross * pint
        return det, ddet


def char_poly_eval(matrix: DenseMatrix, E):
    """Evaluate det(M - E I) and its E-derivative at one point."""
    return _BandedChar(matrix).eval(E)


# --- Aberth-Ehrlich root finder ----------------------------------------------


def _initial_circle(n: int, radius):
    pts = []
    for k in range(n):
        theta = 2 * mp.pi * (k + mp.mpf(1) / 2) / n + mp.mpf("0.3779")
        pts.append(radius * mp.expj(theta))
    return pts


def aberth_roots(matrix: DenseMatrix, cfg: PrecisionConfig, seeds=None):
    """All eigenvalues of a banded-plus-corner matrix, sorted by (Re, Im).

    Simultaneous Aberth-Ehrlich iteration on the characteristic polynomial;
    the convergence criterion is the scale-normalized Newton step
    |p/p'| <= tol*(1 + |z|) for every root, followed by two polishing sweeps
    so converged roots are limited by the working precision rather than the
    tolerance. Default initial guesses sit on a circle of radius
    1 + max row sum, rotated off the axes to break spectral symmetries;
    ``seeds`` (one per root) can replace them to warm-start a scan.
    """
    with cfg.context():
        n = matrix.dim
        if n == 1:
            return [mp.mpc(matrix.entries[0][0])]
        poly = _BandedChar(matrix)
        tol = max(cfg.eps, mp.mpf(2) ** (8 - mp.mp.prec))
        nudge = mp.mpf("1e-3") * (1 + matrix.max_row_sum())
        if seeds is not None:
            if len(seeds) != n:
                raise ValueError(f"need {n} seeds, got {len(seeds)}")
            z = [mp.mpc(s) for s in seeds]
            # coincident seeds would lock iterates together; split them
            seen = set()
            for k in range(n):
                while (z[k].real, z[k].imag) in seen:
                    z[k] += nudge * mp.expj(mp.mpf("2.39996") * (k + 1))
                seen.add((z[k].real, z[k].imag))
        else:
            z = _initial_circle(n, 1 + matrix.max_row_sum())
        polish = 2
        converged_at = None
        for sweep in range(cfg.max_iter):
            moved = mp.mpf(0)
            steps = []
            for i in range(n):
                p, dp = poly.eval(z[i])
                if p == 0:
                    steps.append(mp.mpc(0))
                    continue
                if dp == 0:
                    # re-seed this iterate deterministically off the stationary point
                    steps.append(-nudge * mp.expj(2 * mp.pi * mp.mpf(i) / n + mp.mpf("0.11")))
                    continue
                newton = p / dp
                ssum = mp.mpc(0)
                for j in range(n):
                    if j != i:
                        dzij = z[i] - z[j]
                        if dzij == 0:
                            dzij = mp.mpc(nudge * mp.mpf(2) ** (-mp.mp.prec // 2))
                        ssum += 1 / dzij
                denom = 1 - newton * ssum
                w = newton if denom == 0 else newton / denom
                steps.append(w)
            for i in range(n):
                z[i] = z[i] - steps[i]
                rel = abs(steps[i]) / (1 + abs(z[i]))
                if rel > moved:
                    moved = rel
            if converged_at is not None:
                if sweep - converged_at >= polish:
                    break
            elif moved <= tol:
                converged_at = sweep
        else:
            if converged_at is None:
                raise ConvergenceError(
                    f"root iteration did not converge in {cfg.max_iter} sweeps; "
                    f"worst relative step {mp.nstr(moved, 5)}"
                )
        z.sort(key=lambda w: (w.real, w.imag))
        return [+w for w in z]


# --- double-precision reference solver ----------------------------------------


def _hessenberg_double(A: np.ndarray) -> np.ndarray:
    H = np.array(A, dtype=complex)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1 :, k]
        if not x[1:].any():
            continue
        v = x.copy()
        alpha = -np.exp(1j * np.angle(x[0])) * np.linalg.norm(x) if x[0] != 0 else -np.linalg.norm(x)
        v[0] -= alpha
        vn = np.linalg.norm(v)
        if vn == 0:
            continue
        v /= vn
        H[k + 1 :, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1 :, k:])
        H[:, k + 1 :] -= 2.0 * np.outer(H[:, k + 1 :] @ v, v.conj())
    return H


def qr_reference(matrix: DenseMatrix, max_sweeps: int = 100000) -> list:
    """Eigenvalues by plain double-precision Hessenberg + Wilkinson-shifted QR.

    No balancing, complex single shift, Givens sweeps, neighbor-relative
    deflation: a faithful textbook solver. It is backward stable, which is
    exactly why it fails forward on skin-effect chains: eigenvalue condition
    numbers grow like (t_R/t_L)^(N/2), and once they pass ~1/eps_double the
    computed spectrum scatters off the real axis. Kept for documentation and
    cross-checks, not production use.
    """
    H = _hessenberg_double(matrix.to_numpy())
    eps = float(np.finfo(float).eps)
    hnorm = max(float(np.abs(H).sum(axis=1).max()), 1e-300)
    n = H.shape[0]
    eigs = []
    sweeps = 0
    while n > 1:
        sweeps += 1
        if sweeps > max_sweeps:
            raise ConvergenceError(f"shifted QR did not converge within {max_sweeps} sweeps")
        for m in range(n - 1, 0, -1):
            thr = eps * (abs(H[m - 1, m - 1]) + abs(H[m, m]))
            if thr == 0.0:
                thr = eps * hnorm
            if abs(H[m, m - 1]) <= thr:
                H[m, m - 1] = 0.0
        if H[n - 1, n - 2] == 0.0:
            eigs.append(complex(H[n - 1, n - 1]))
            n -= 1
            continue
        a, b = H[n - 2, n - 2], H[n - 2, n - 1]
        c, d = H[n - 1, n - 2], H[n - 1, n - 1]
        disc = np.lib.scimath.sqrt((a - d) ** 2 + 4 * b * c)
        r1, r2 = (a + d + disc) / 2, (a + d - disc) / 2
        mu = r1 if abs(r1 - d) <= abs(r2 - d) else r2
        B = H[:n, :n] - mu * np.eye(n)
        rots = []
        for k in range(n - 1):
            x, y = B[k, k], B[k + 1, k]
            r = np.hypot(abs(x), abs(y))
            if r == 0:
                cth, sth = 1.0 + 0j, 0.0 + 0j
            else:
                cth, sth = np.conj(x) / r, np.conj(y) / r
            rows = B[[k, k + 1], :].copy()
            B[k, :] = cth * rows[0] + sth * rows[1]
            B[k + 1, :] = -np.conj(sth) * rows[0] + np.conj(cth) * rows[1]
            rots.append((cth, sth))
        for k, (cth, sth) in enumerate(rots):
            cols = B[:, [k, k + 1]].copy()
            B[:, k] = cols[:, 0] * np.conj(cth) + cols[:, 1] * np.conj(sth)
            B[:, k + 1] = -cols[:, 0] * sth + cols[:, 1] * cth
        H[:n, :n] = B + mu * np.eye(n)
    if n == 1:
        eigs.append(complex(H[0, 0]))
    eigs.sort(key=lambda w: (w.real, w.imag))
    return eigs


# --- linear solves at working precision ---------------------------------------


def _solve_tridiag(diag, sup, sub, rhs):
    """Solve T x = rhs by Gaussian elimination with partial pivoting (O(N)).

    Pivoting fills one extra superdiagonal. Exact zero pivots (possible when
    the shift hits an eigenvalue to full precision) are replaced by a tiny
    value, which is what inverse iteration wants anyway.
    """
    n = len(diag)
    d = [mp.mpc(v) for v in diag]
    u = [mp.mpc(v) for v in sup] + [mp.mpc(0)]
    lo = [mp.mpc(v) for v in sub]
    b = [mp.mpc(v) for v in rhs]
    du2 = [mp.mpc(0)] * n
    scale = max(max(abs(v) for v in d), max((abs(v) for v in u), default=mp.mpf(0)), mp.mpf(1))
    tiny = scale * mp.mpf(2) ** (-2 * mp.mp.prec)
    for i in range(n - 1):
        if abs(d[i]) >= abs(lo[i]):
            piv = d[i] if d[i] != 0 else tiny
            m = lo[i] / piv
            d[i + 1] -= m * u[i]
            b[i + 1] -= m * b[i]
        else:
            m = d[i] / lo[i]
            d[i] = lo[i]
            old_di1, old_ui = d[i + 1], u[i]
            u[i] = old_di1
            d[i + 1] = old_ui - m * old_di1
            if i + 1 < n - 1:
                du2[i] = u[i + 1]
                u[i + 1] = -m * du2[i]
            b[i], b[i + 1] = b[i + 1], b[i] - m * b[i + 1]
    x = [mp.mpc(0)] * n
    piv = d[n - 1] if d[n - 1] != 0 else tiny
    x[n - 1] = b[n - 1] / piv
    if n >= 2:
        piv = d[n - 2] if d[n - 2] != 0 else tiny
        x[n - 2] = (b[n - 2] - u[n - 2] * x[n - 1]) / piv
    for i in range(n - 3, -1, -1):
        piv = d[i] if d[i] != 0 else tiny
        x[i] = (b[i] - u[i] * x[i + 1] - du2[i] * x[i + 2]) / piv
    return x


def _solve_dense(rows, rhs):
    """Dense Gaussian elimination with partial pivoting; O(N^3), small N only."""
    n = len(rows)
    a = [list(r) for r in rows]
    b = [mp.mpc(v) for v in rhs]
    scale = max(max(abs(v) for v in row) for row in rows) or mp.mpf(1)
    tiny = scale * mp.mpf(2) ** (-2 * mp.mp.prec)
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(a[i][k]))
        if p != k:
            a[k], a[p] = a[p], a[k]
            b[k], b[p] = b[p], b[k]
        piv = a[k][k] if a[k][k] != 0 else tiny
        for i in range(k + 1, n):
            if a[i][k] == 0:
                continue
            m = a[i][k] / piv
            for j in range(k + 1, n):
                a[i][j] -= m * a[k][j]
            a[i][k] = mp.mpc(0)
            b[i] -= m * b[k]
    x = [mp.mpc(0)] * n
    for i in range(n - 1, -1, -1):
        s = b[i]
        for j in range(i + 1, n):
            s -= a[i][j] * x[j]
        piv = a[i][i] if a[i][i] != 0 else tiny
        x[i] = s / piv
    return x


def _nullspace_dense(rows, nullity: int, pivot_tol):
    """Basis of the (approximate) nullspace via full-pivot elimination."""
    n = len(rows)
    a = [list(r) for r in rows]
    cols = list(range(n))
    rank = 0
    for k in range(n):
        best, bi, bj = mp.mpf(-1), k, k
        for i in range(k, n):
            for j in range(k, n):
                if abs(a[i][j]) > best:
                    best, bi, bj = abs(a[i][j]), i, j
        if best <= pivot_tol:
            break
        a[k], a[bi] = a[bi], a[k]
        if bj != k:
            for row in a:
                row[k], row[bj] = row[bj], row[k]
            cols[k], cols[bj] = cols[bj], cols[k]
        piv = a[k][k]
        for i in range(k + 1, n):
            if a[i][k] == 0:
                continue
            m = a[i][k] / piv
            for j in range(k, n):
                a[i][j] -= m * a[k][j]
        rank += 1
    free = list(range(rank, n))[: max(nullity, n - rank)]
    basis = []
    for f in free:
        x = [mp.mpc(0)] * n
        x[f] = mp.mpc(1)
        for i in range(rank - 1, -1, -1):
            s = mp.mpc(0)
            for j in range(i + 1, n):
                s += a[i][j] * x[j]
            x[i] = -s / a[i][i]
        out = [mp.mpc(0)] * n
        for pos, orig in enumerate(cols):
            out[orig] = x[pos]
        basis.append(out)
    return basis


# --- inverse iteration ---------------------------------------------------------


def _start_vector(n: int):
    # deterministic, unstructured start: avoids exact orthogonality to
    # parity-symmetric eigenvectors that an all-ones start would hit
    state = 123456789
    v = []
    for _ in range(n):
        state = (1103515245 * state + 12345) % (1 << 31)
        re = 1 + mp.mpf(state % 1000) / 2000
        state = (1103515245 * state + 12345) % (1 << 31)
        im = mp.mpf(state % 1000) / 3000
        v.append(mp.mpc(re, im))
    return v


class _ShiftedSolver:
    """Solve (M - E I) x = b, picking the banded or dense path once."""

    def __init__(self, matrix: DenseMatrix, E, transpose: bool, poly: _BandedChar | None = None):
        poly = poly or _BandedChar(matrix)
        self.E = mp.mpc(E)
        n = matrix.dim
        self.n = n
        sup, sub = poly.sup, poly.sub
        tr, bl = poly.tr, poly.bl
        if transpose:
            sup, sub = sub, sup
            tr, bl = bl, tr
        self.diag = [d - self.E for d in poly.diag]
        self.sup = sup
        self.sub = sub
        self.banded = not poly.has_corners
        if not self.banded:
            rows = [[mp.mpc(0)] * n for _ in range(n)]
            for i in range(n):
                rows[i][i] = self.diag[i]
            for i in range(n - 1):
                rows[i][i + 1] = sup[i]
                rows[i + 1][i] = sub[i]
            rows[0][n - 1] += tr
            rows[n - 1][0] += bl
            self.rows = rows

    def solve(self, b):
        if self.banded:
            return _solve_tridiag(self.diag, self.sup, self.sub, b)
        return _solve_dense(self.rows, b)

    def apply_residual(self, v):
        """|(M - E I) v| / |v| for the (possibly transposed) operator."""
        n = self.n
        out = []
        for i in range(n):
            s = self.diag[i] * v[i]
            if i + 1 < n:
                s += self.sup[i] * v[i + 1]
            if i > 0:
                s += self.sub[i - 1] * v[i - 1]
            if not self.banded:
                if i == 0:
                    s += self.rows[0][n - 1] * v[n - 1] if n >= 3 else 0
                if i == n - 1:
                    s += self.rows[n - 1][0] * v[0] if n >= 3 else 0
            out.append(s)
        num = mp.sqrt(mp.fsum(abs(s) ** 2 for s in out))
        den = mp.sqrt(mp.fsum(abs(x) ** 2 for x in v))
        return num / den


def _inverse_iterate(matrix: DenseMatrix, E, cfg: PrecisionConfig, transpose: bool,
                     poly: _BandedChar | None = None):
    solver = _ShiftedSolver(matrix, E, transpose, poly)
    v = _start_vector(matrix.dim)
    residual = mp.inf
    for _ in range(6):
        w = solver.solve(v)
        norm = mp.sqrt(mp.fsum(abs(x) ** 2 for x in w))
        if norm == 0 or not mp.isfinite(norm):
            v = _start_vector(matrix.dim)[::-1]
            continue
        v = [x / norm for x in w]
        residual = solver.apply_residual(v)
        if residual <= cfg.eps:
            break
    return v, residual


def eigenvector_pair(matrix: DenseMatrix, E, cfg: PrecisionConfig):
    """Right/left eigenvectors at a converged eigenvalue, via inverse iteration.

    The left vector solves the transposed problem M^T psi_L = E psi_L. Both
    come back L2-normalized with the largest-magnitude entry real positive.
    """
    with cfg.context():
        poly = _BandedChar(matrix)
        right, res_r = _inverse_iterate(matrix, E, cfg, transpose=False, poly=poly)
        left, res_l = _inverse_iterate(matrix, E, cfg, transpose=True, poly=poly)
        worst = max(res_r, res_l)
        if worst > cfg.eps:
            raise ConvergenceError(
                f"inverse iteration stalled at residual {mp.nstr(worst, 5)} for E = {mp.nstr(mp.mpc(E), 8)}"
            )
        e = mp.mpc(E)
        return (
            ModeProfile(tuple(normalize_phase(right)), "single_mode", e),
            ModeProfile(tuple(normalize_phase(left)), "single_mode", e),
        )


def _pair_with_residual(matrix, E, cfg, poly=None):
    right, res_r = _inverse_iterate(matrix, E, cfg, transpose=False, poly=poly)
    left, res_l = _inverse_iterate(matrix, E, cfg, transpose=True, poly=poly)
    e = mp.mpc(E)
    return (
        ModeProfile(tuple(normalize_phase(right)), "single_mode", e),
        ModeProfile(tuple(normalize_phase(left)), "single_mode", e),
        max(res_r, res_l),
    )


def _cluster_groups(roots, cfg):
    groups = []
    current = [0]
    for i in range(1, len(roots)):
        thr = 1000 * cfg.eps * (1 + abs(roots[i]))
        if abs(roots[i] - roots[i - 1]) <= thr:
            current.append(i)
        else:
            groups.append(current)
            current = [i]
    groups.append(current)
    return groups


def full_spectrum(matrix: DenseMatrix, cfg: PrecisionConfig, seeds=None) -> Spectrum:
    """Aberth roots + inverse-iteration eigenpairs for every eigenvalue.

    Roots within 1000*tol of each other are treated as a cluster and their
    eigenvectors are extracted from a dense nullspace problem at the cluster
    mean instead of individual shifted solves.
    """
    with cfg.context():
        roots = aberth_roots(matrix, cfg, seeds=seeds)
        groups = _cluster_groups(roots, cfg)
        n = matrix.dim
        poly = _BandedChar(matrix)
        rights = [None] * n
        lefts = [None] * n
        residuals = [None] * n
        for group in groups:
            if len(group) == 1:
                i = group[0]
                r, l, res = _pair_with_residual(matrix, roots[i], cfg, poly=poly)
                rights[i], lefts[i], residuals[i] = r, l, res
                if res > cfg.eps:
                    raise ConvergenceError(
                        f"residual {mp.nstr(res, 5)} above tolerance at root index {i}"
                    )
                continue
            center = mp.fsum(roots[i] for i in group) / len(group)
            diameter = max(abs(roots[i] - center) for i in group)
            pivot_tol = (diameter + 1000 * cfg.eps) * (1 + matrix.max_row_sum())
            shifted = [
                [matrix.entries[i][j] - (center if i == j else 0) for j in range(n)]
                for i in range(n)
            ]
            shifted_t = [[shifted[j][i] for j in range(n)] for i in range(n)]
            basis_r = _nullspace_dense(shifted, len(group), pivot_tol)
            basis_l = _nullspace_dense(shifted_t, len(group), pivot_tol)
            for slot, i in enumerate(group):
                if slot < len(basis_r) and slot < len(basis_l):
                    vr = normalize_phase(basis_r[slot])
                    vl = normalize_phase(basis_l[slot])
                    solver = _ShiftedSolver(matrix, roots[i], transpose=False, poly=poly)
                    solver_t = _ShiftedSolver(matrix, roots[i], transpose=True, poly=poly)
                    res = max(solver.apply_residual(vr), solver_t.apply_residual(vl))
                else:
                    # defective direction: fall back to inverse iteration and
                    # report the honest residual so callers see the failure
                    r, l, res = _pair_with_residual(matrix, roots[i], cfg, poly=poly)
                    vr, vl = list(r.amplitudes), list(l.amplitudes)
                cluster_tol = max(cfg.eps, 2 * diameter)
                if res > cluster_tol * (1 + abs(roots[i])):
                    raise ConvergenceError(
                        f"residual {mp.nstr(res, 5)} above tolerance at clustered root index {i}"
                    )
                e = mp.mpc(roots[i])
                rights[i] = ModeProfile(tuple(vr), "single_mode", e)
                lefts[i] = ModeProfile(tuple(vl), "single_mode", e)
                residuals[i] = res
        return Spectrum(
            eigenvalues=tuple(roots),
            right_vectors=tuple(rights),
            left_vectors=tuple(lefts),
            residuals=tuple(residuals),
        )
