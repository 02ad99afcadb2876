"""Closed-form spectral machinery for the impurity chain.

Everything here descends from one three-term recursion: eigenvector entries
obey t_L f_{j+1} = E f_j - t_R f_{j-1}, whose normalized solution
F(j) = (r_+^j - r_-^j)/(r_+ - r_-), 2 r_pm = x pm sqrt(x^2 - 4y),
x = E/t_L, y = t_R/t_L, plays the role a Chebyshev polynomial plays for the
reciprocal chain. Admissible energies are roots of transcendental
quantization conditions (one for open ends, one for the ring); the impurity
and boundary data enter only there. On top sit the closed-form observables:
the critical impurity strength for the out-of-band transition, the linear
mode that appears exactly there, the impurity strength that cancels the
skin effect (ICSE), and the associated localization scales.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .lattice import ChainSpec, OBC, dispersion_obc, sqrt_hopping_product
from .precision import PrecisionConfig, acos_c, acosh_c, hpc
from .profile import ModeProfile, normalize_phase
from .spectral import ConvergenceError

RECURSION_LIMIT = 1000


@dataclass(frozen=True)
class FibContext:
    """Carrier for x = E/t_L, y = t_R/t_L and the recursion roots r_pm."""

    x: mp.mpc
    y: mp.mpc
    r_plus: mp.mpc
    r_minus: mp.mpc

    @classmethod
    def from_energy(cls, energy, t_left, t_right) -> "FibContext":
        tL, tR = hpc(t_left), hpc(t_right)
        x = hpc(energy) / tL
        y = tR / tL
        disc = mp.sqrt(x * x - 4 * y)
        return cls(x=x, y=y, r_plus=(x + disc) / 2, r_minus=(x - disc) / 2)

    @classmethod
    def from_spec(cls, spec: ChainSpec, energy) -> "FibContext":
        return cls.from_energy(energy, spec.t_left, spec.t_right)


@dataclass(frozen=True)
class QuantizationResidual:
    """LHS - RHS of a quantization condition at one (kd, E) candidate."""

    value: mp.mpc
    kd: mp.mpc
    energy: mp.mpc

    def magnitude(self) -> mp.mpf:
        return abs(self.value)


def _fib_run(x, y, j_lo: int, j_hi: int) -> dict:
    """F(j) for all j in [j_lo, j_hi] by the recursion, anchored at F(0)=0, F(1)=1."""
    table = {0: mp.mpc(0), 1: mp.mpc(1)}
    f_prev, f_cur = table[0], table[1]
    for j in range(1, j_hi):
        f_prev, f_cur = f_cur, x * f_cur - y * f_prev
        table[j + 1] = f_cur
    f_next, f_cur = table[1], table[0]
    for j in range(0, j_lo, -1):
        f_next, f_cur = f_cur, (x * f_cur - f_next) / y
        table[j - 1] = f_cur
    return table


def fib_poly(j: int, ctx: FibContext) -> mp.mpc:
    """F(j), by recursion for |j| <= 1000 and by the closed form beyond.

    Negative orders extend through the recursion itself, giving
    F(-1) = -1/y. The closed form switches to the confluent limit
    F(j) = j (x/2)^(j-1) when r_+ and r_- coincide to working precision.
    """
    if abs(j) <= RECURSION_LIMIT:
        table = _fib_run(ctx.x, ctx.y, min(j, 0), max(j, 1))
        return table[j]
    diff = ctx.r_plus - ctx.r_minus
    scale = 1 + abs(ctx.r_plus) + abs(ctx.r_minus)
    if abs(diff) <= scale * mp.mpf(2) ** (-mp.mp.prec // 2):
        r = ctx.x / 2
        return j * r ** (j - 1)
    return (ctx.r_plus ** j - ctx.r_minus ** j) / diff


def fib_poly_kd(j: int, kd, y) -> mp.mpc:
    """F(j) in wavevector form sqrt(y)^(j-1) sin(j kd)/sin(kd).

    The sin ratio has removable singularities at kd = 0, pi; they are taken
    through the cos-quotient limit when sin(kd) vanishes exactly.
    """
    kd = mp.mpc(kd)
    rooty = mp.sqrt(mp.mpc(y))
    s = mp.sin(kd)
    if s == 0:
        ratio = j * mp.cos(j * kd) / mp.cos(kd)
    else:
        ratio = mp.sin(j * kd) / s
    return rooty ** (j - 1) * ratio


def _sin_ratio(a: int, kd):
    s = mp.sin(kd)
    if s == 0:
        return a * mp.cos(a * kd) / mp.cos(kd)
    return mp.sin(a * kd) / s


def _sin_ratio_deriv(a: int, kd):
    # d/dkd [sin(a kd)/sin(kd)] = (a cos(a kd) - S_a cos(kd)) / sin(kd),
    # which vanishes at the removable points kd = 0, pi by parity
    s = mp.sin(kd)
    if s == 0:
        return mp.mpc(0)
    return (a * mp.cos(a * kd) - _sin_ratio(a, kd) * mp.cos(kd)) / s


def quantization_residual_obc(spec: ChainSpec, kd) -> QuantizationResidual:
    """Open-chain quantization residual at kd.

    value = (delta/sqrt(t_L t_R)) * [sin(l kd)/sin kd] * [sin((N-l+1) kd)/sin kd]
            - sin((N+1) kd)/sin kd,
    zero exactly at admissible wavevectors. For delta = 0 this reduces to
    sin((N+1) kd) = 0, i.e. kd = n pi/(N+1).
    """
    kd = mp.mpc(kd)
    n, l = spec.n_sites, spec.impurity_site
    s = sqrt_hopping_product(spec)
    value = (spec.dlt / s) * _sin_ratio(l, kd) * _sin_ratio(n - l + 1, kd) \
        - _sin_ratio(n + 1, kd)
    return QuantizationResidual(value=value, kd=kd, energy=dispersion_obc(kd, spec))


def _obc_residual_parts(spec: ChainSpec, kd):
    n, l = spec.n_sites, spec.impurity_site
    s = sqrt_hopping_product(spec)
    pref = spec.dlt / s
    sl, sm, sn = _sin_ratio(l, kd), _sin_ratio(n - l + 1, kd), _sin_ratio(n + 1, kd)
    f = pref * sl * sm - sn
    dsl, dsm, dsn = (
        _sin_ratio_deriv(l, kd),
        _sin_ratio_deriv(n - l + 1, kd),
        _sin_ratio_deriv(n + 1, kd),
    )
    df = pref * (dsl * sm + sl * dsm) - dsn
    scale = max(abs(pref * sl * sm), abs(sn), mp.mpf(1))
    return f, df, scale


def quantization_residual_pbc(spec: ChainSpec, r_plus) -> QuantizationResidual:
    """Ring quantization residual in terms of the recursion root r_+.

    value = (delta/t_L) (r_+^N - r_-^N)/(r_+ - r_-) + (1 - r_+^N)(1 - r_-^N)
    with r_- = (t_R/t_L)/r_+. At delta = 0 the roots are |r_+| = 1 with
    qd = 2 pi n/N; in kd form (r_pm = sqrt(y) e^(+-i kd)) the delta = 0
    condition reads cos(N kd) = (t_L^N + t_R^N)/(2 sqrt(t_L t_R))^N.
    """
    r_plus = mp.mpc(r_plus)
    if r_plus == 0:
        raise ValueError("r_plus must be nonzero")
    n = spec.n_sites
    y = spec.tR / spec.tL
    r_minus = y / r_plus
    diff = r_plus - r_minus
    if abs(diff) <= (1 + abs(r_plus) + abs(r_minus)) * mp.mpf(2) ** (-mp.mp.prec // 2):
        phi = n * r_plus ** (n - 1)
    else:
        phi = (r_plus ** n - r_minus ** n) / diff
    value = (spec.dlt / spec.tL) * phi + (1 - r_plus ** n) * (1 - r_minus ** n)
    rooty = mp.sqrt(y)
    kd = mp.mpc(0, -1) * mp.log(r_plus / rooty)
    energy = spec.tL * (r_plus + r_minus)
    return QuantizationResidual(value=value, kd=kd, energy=energy)


def _pbc_residual_parts(spec: ChainSpec, kd):
    n = spec.n_sites
    y = spec.tR / spec.tL
    rooty = mp.sqrt(y)
    r_plus = rooty * mp.expj(kd)
    r_minus = y / r_plus
    diff = r_plus - r_minus
    if abs(diff) <= (1 + abs(r_plus) + abs(r_minus)) * mp.mpf(2) ** (-mp.mp.prec // 2):
        phi = n * r_plus ** (n - 1)
    else:
        phi = (r_plus ** n - r_minus ** n) / diff
    term1 = (spec.dlt / spec.tL) * phi
    term2 = (1 - r_plus ** n) * (1 - r_minus ** n)
    return term1 + term2, max(abs(term1), abs(term2), mp.mpf(1))


def _residual_parts(spec: ChainSpec, kd, fd_step):
    """(value, derivative, term scale) of the boundary-matched residual."""
    if spec.boundary == OBC:
        return _obc_residual_parts(spec, kd)
    f, scale = _pbc_residual_parts(spec, kd)
    fp, _ = _pbc_residual_parts(spec, kd + fd_step)
    fm, _ = _pbc_residual_parts(spec, kd - fd_step)
    return f, (fp - fm) / (2 * fd_step), scale


def _reduce_brillouin(kd) -> mp.mpc:
    """Map Re(kd) into [0, pi] using 2pi-periodicity and evenness in kd.

    On the boundary lines Re = 0, pi both +-Im representatives live in the
    domain; bound modes are reported with Im >= 0 there.
    """
    two_pi = 2 * mp.pi
    re = kd.real - two_pi * mp.floor(kd.real / two_pi)
    kd = mp.mpc(re, kd.imag)
    if re > mp.pi:
        kd = mp.mpc(two_pi - re, -kd.imag)
    snap = mp.mpf(2) ** (-(mp.mp.prec // 2)) * (1 + abs(kd.imag))
    if kd.imag < 0:
        if abs(kd.real) <= snap:
            kd = mp.mpc(abs(kd.real), -kd.imag)
        elif abs(kd.real - mp.pi) <= snap:
            kd = mp.mpc(2 * mp.pi - kd.real, -kd.imag)
    return kd


def refine_wavevector(spec: ChainSpec, energy_seed, cfg: PrecisionConfig):
    """Newton-polish (kd, E) starting from a solver eigenvalue.

    The seed is kd0 = acos(E/(2 sqrt(t_L t_R))); Newton then drives the
    boundary-appropriate quantization residual below cfg.tol relative to the
    size of its terms (the terms grow like e^(N Im kd) for bound modes, so an
    absolute criterion would be meaningless there). Open chains use the
    analytic derivative of the sin-ratio form; the ring residual is polished
    with a central-difference derivative. Returns kd reduced to Re in
    [0, pi] and E from the dispersion at the polished kd.
    """
    with cfg.context():
        s = sqrt_hopping_product(spec)
        kd = acos_c(hpc(energy_seed) / (2 * s))
        eps_work = mp.mpf(2) ** (4 - mp.mp.prec)
        fd_step = mp.mpf(2) ** (-(mp.mp.prec // 2))
        for _ in range(cfg.max_iter):
            f, df, scale = _residual_parts(spec, kd, fd_step)
            if abs(f) <= cfg.eps * scale:
                break
            if df == 0:
                kd += mp.mpf("1e-2") * (1 + abs(kd)) * mp.expj(mp.mpf("0.7"))
                continue
            step = f / df
            kd -= step
            if abs(step) <= eps_work * (1 + abs(kd)):
                break
        f, _, scale = _residual_parts(spec, kd, fd_step)
        if abs(f) > mp.sqrt(cfg.eps) * scale:
            err = ConvergenceError(
                f"wavevector polishing stalled, |residual| = {mp.nstr(abs(f), 5)}"
            )
            err.last_kd = kd
            raise err
        kd = _reduce_brillouin(kd)
        return +kd, dispersion_obc(kd, spec)


def closed_form_eigenvector(spec: ChainSpec, kd) -> ModeProfile:
    """Exact eigenvector for an admissible open-chain wavevector kd.

    Uses the pole-free product form
        psi_j = F(l-N-1) F(j)      for j <= l,
        psi_j = F(l) F(j-N-1)      for j >  l,
    which satisfies continuity at the impurity site identically and reduces
    to psi_j ~ F(j) for delta = 0. L2-normalized, largest entry real
    positive; kd must solve the quantization condition or the result is not
    an eigenvector of anything.
    """
    if spec.boundary != OBC:
        raise ValueError("closed-form eigenvectors are built for open chains")
    n, l = spec.n_sites, spec.impurity_site
    energy = dispersion_obc(kd, spec)
    x = energy / spec.tL
    y = spec.tR / spec.tL
    table = _fib_run(x, y, l - n - 1, n + 1)
    left_coef = table[l - n - 1]
    right_coef = table[l]
    fam_left = max(abs(table[j]) for j in range(1, n + 1))
    fam_right = max(abs(table[j]) for j in range(l - n - 1, 0))
    eta = mp.mpf(2) ** (-(mp.mp.prec // 2))
    if abs(right_coef) <= eta * fam_left and abs(left_coef) <= eta * fam_right:
        # node-at-impurity coincidence (sin(l kd) = sin((N+1-l) kd) = 0):
        # the mode never feels delta and is the pristine-chain solution
        vec = [table[j] for j in range(1, n + 1)]
    else:
        vec = [left_coef * table[j] for j in range(1, l + 1)]
        vec += [right_coef * table[j - n - 1] for j in range(l + 1, n + 1)]
    return ModeProfile(tuple(normalize_phase(vec)), "single_mode", +mp.mpc(energy))


def delta_critical(n_sites: int, l: int, t_left, t_right):
    """Impurity strengths +-sqrt(t_L t_R)(N+1)/(l(N+1-l)) where the impurity
    mode energy meets a band edge and its profile turns linear."""
    if not 1 <= l <= n_sites:
        raise ValueError(f"impurity site {l} outside chain of {n_sites} sites")
    s = mp.sqrt(hpc(t_left) * hpc(t_right))
    val = s * (n_sites + 1) / mp.mpf(l * (n_sites + 1 - l))
    return +val, -val


def linear_mode(spec: ChainSpec, sign: int, rtol=None) -> ModeProfile:
    """The band-edge impurity mode at delta = delta_c: linear times exponential.

    psi_j = q^(j-1) j for j <= l and psi_j = l q^(j-1) (j-N-1)/(l-N-1) for
    j > l, with q = sign * sqrt(t_R/t_L) taken on the same branch as the
    dispersion (q = sign * sqrt(t_L t_R)/t_L). sign +1 belongs to kd = 0
    (E = +2 sqrt(t_L t_R)), sign -1 to kd = pi.
    """
    if spec.boundary != OBC:
        raise ValueError("linear modes are an open-chain feature")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    n, l = spec.n_sites, spec.impurity_site
    plus, minus = delta_critical(n, l, spec.t_left, spec.t_right)
    target = plus if sign == 1 else minus
    if rtol is None:
        rtol = mp.mpf(2) ** (-(mp.mp.prec // 2))
    if abs(spec.dlt - target) > rtol * (1 + abs(target)):
        raise ValueError(
            f"spec.delta = {mp.nstr(spec.dlt, 8)} is not the critical strength "
            f"{mp.nstr(target, 8)} for sign {sign:+d}"
        )
    q = sign * sqrt_hopping_product(spec) / spec.tL
    vec = [q ** (j - 1) * j for j in range(1, l + 1)]
    vec += [l * q ** (j - 1) * mp.mpf(j - n - 1) / (l - n - 1) for j in range(l + 1, n + 1)]
    energy = sign * 2 * sqrt_hopping_product(spec)
    return ModeProfile(tuple(normalize_phase(vec)), "single_mode", +mp.mpc(energy))


def icse_delta(spec: ChainSpec):
    """Impurity strengths +-delta at which the impurity mode goes flat.

    Bulk sites: +-(t_R - t_L). Edge sites get the adapted conditions
    +-t_R (l = 1) and +-t_L (l = N); in between the crossover has no closed
    form and the bulk value is returned.
    """
    if spec.boundary != OBC:
        raise ValueError("the counter skin-effect condition applies to open chains")
    if spec.impurity_site == 1:
        val = spec.tR
    elif spec.impurity_site == spec.n_sites:
        val = spec.tL
    else:
        val = spec.tR - spec.tL
    return +val, -val


def icse_energy_estimate(t_left, t_right, sign: int = 1) -> mp.mpc:
    """Flat-profile energy estimate +-(t_L + t_R) for the skin-cancelling mode."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return sign * (hpc(t_left) + hpc(t_right))


def y_critical(n_sites: int, l: int):
    """Hopping-ratio window limits (y_c+, y_c-) for the flat impurity mode.

    b = (N+1)/(l(N+1-l)); y_c_pm = (b pm sqrt(b^2+4))^2/4. The product
    y_c+ * y_c- is identically 1, and b <= 1 + 1/N forces
    y_c+ >= 1 >= y_c-.
    """
    if not 1 <= l <= n_sites:
        raise ValueError(f"impurity site {l} outside chain of {n_sites} sites")
    b = mp.mpf(n_sites + 1) / (l * (n_sites + 1 - l))
    s = mp.sqrt(b * b + 4)
    return (b + s) ** 2 / 4, (b - s) ** 2 / 4


def skin_length_scale(t_left, t_right) -> mp.mpc:
    """Inverse skin-effect decay rate 2/ln(t_R/t_L) (sites per e-fold)."""
    return 2 / mp.log(hpc(t_right) / hpc(t_left))


def kappa_localization(t_left, t_right):
    """Impurity-mode decay rate kappa*d = arccosh[(t_L+t_R)/(2 sqrt(t_L t_R))].

    Returns exact 0 when t_L = t_R (no decay). In the real regime
    t_R > t_L > 0, kappa equals half the log hopping ratio, i.e. 1/kappa is
    the skin-effect length scale; the two expressions are cross-checked.
    """
    tL, tR = hpc(t_left), hpc(t_right)
    if tL == tR:
        return mp.mpf(0)
    kd = acosh_c((tL + tR) / (2 * mp.sqrt(tL * tR)))
    if tL.imag == 0 and tR.imag == 0 and tR.real > tL.real > 0:
        alt = mp.log(tR.real / tL.real) / 2
        if abs(kd - alt) > mp.mpf(2) ** (16 - mp.mp.prec) * (1 + abs(alt)):
            raise ArithmeticError("localization scales disagree in the real regime")
    return kd
