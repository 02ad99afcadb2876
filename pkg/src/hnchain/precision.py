"""Configurable-precision complex arithmetic kernel.

Every heavy computation in this package runs on mpmath numbers (mpf/mpc),
which carry an arbitrary mantissa width and evaluate transcendental
functions by argument reduction + series at the active working precision.
Double precision is not enough here: open non-reciprocal chains have
eigenvalue condition numbers growing like (t_R/t_L)^(N/2), so spectra that
are exactly real get scattered into the complex plane by ordinary solvers
once N is moderately large.

Precision is ambient (mpmath context) plus explicit: operations that take a
PrecisionConfig run inside ``cfg.context()``; everything else evaluates at
the caller's active precision. Use ``precision_context(bits)`` around any
sequence of calls.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

DEFAULT_BITS = 256
DEFAULT_TOL = "1e-30"


@dataclass(frozen=True)
class PrecisionConfig:
    """Working precision in mantissa bits, residual tolerance, iteration cap.

    ``tol`` may be given as a string (parsed at ``bits`` precision), float or
    mpf. Defaults leave two-sided headroom: residuals of correctly converged
    quantities sit near 2^-256 ~ 1e-77 while the tolerance is 1e-30.
    """

    bits: int = DEFAULT_BITS
    tol: object = DEFAULT_TOL
    max_iter: int = 200

    def __post_init__(self):
        if int(self.bits) < 53:
            raise ValueError(f"bits must be >= 53, got {self.bits}")
        if int(self.max_iter) < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.eps <= 0:
            raise ValueError(f"tol must be > 0, got {self.tol!r}")

    def context(self):
        """mpmath context manager setting the working precision."""
        return mp.workprec(int(self.bits))

    @property
    def eps(self) -> mp.mpf:
        with mp.workprec(int(self.bits)):
            return mp.mpf(self.tol)


def precision_context(bits: int):
    """Ambient-precision context manager for bare (cfg-less) operations."""
    return mp.workprec(int(bits))


def hpc(re, im=0) -> mp.mpc:
    """Build a high-precision complex number at the active precision.

    Accepts ints, floats, decimal strings, mpf/mpc, python complex, or a
    (re, im) pair. Integers and binary floats convert losslessly; decimal
    strings are rounded at the active precision.
    """
    if isinstance(re, (tuple, list)):
        if im != 0:
            raise ValueError("pass either a pair or separate re/im, not both")
        re, im = re
    if isinstance(re, (complex, mp.mpc)):
        if im != 0:
            raise ValueError("re is already complex, im must be omitted")
        return mp.mpc(re)
    return mp.mpc(mp.mpmathify(re), mp.mpmathify(im))


def _require_finite(z: mp.mpc, what: str) -> None:
    if not (mp.isfinite(z.real) and mp.isfinite(z.imag)):
        raise ValueError(f"{what} must be finite, got {z}")


def acos_c(z, cfg: PrecisionConfig | None = None) -> mp.mpc:
    """Principal-branch complex arccos with cos(acos_c(z)) = z.

    Re of the result lies in [0, pi]; on the real interval (-1, 1) the
    result is real. On the branch cuts |Re z| > 1, Im z = 0 the sign is
    fixed to Im >= 0, so acos_c(x) = +i*arccosh(x) for real x > 1. Downstream
    wavevector refinement seeds from this value; the quantization residual is
    even in kd, so the on-cut sign choice never changes a converged root.

    Without a cfg the active ambient precision is used.
    """
    with cfg.context() if cfg else mp.workprec(mp.mp.prec):
        w = mp.mpc(z)
        _require_finite(w, "acos_c argument")
        out = mp.acos(w)
        if w.imag == 0 and abs(w.real) > 1 and out.imag < 0:
            out = mp.mpc(out.real, -out.imag)
        return +out


def acosh_c(z, cfg: PrecisionConfig | None = None) -> mp.mpc:
    """Principal-branch complex arccosh with cosh(acosh_c(z)) = z, Re >= 0."""
    with cfg.context() if cfg else mp.workprec(mp.mp.prec):
        w = mp.mpc(z)
        _require_finite(w, "acosh_c argument")
        return +mp.acosh(w)


def three_term_sequence(x, y, n: int, f0, f1) -> list:
    """Iterate f_{j+1} = x*f_j - y*f_{j-1} and return [f_0, ..., f_n].

    Evaluated exactly at the active working precision; this recursion is the
    backbone of the closed-form eigenvector machinery.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    x = mp.mpc(x)
    y = mp.mpc(y)
    seq = [mp.mpc(f0), mp.mpc(f1)]
    for _ in range(n - 1):
        seq.append(x * seq[-1] - y * seq[-2])
    return seq[: n + 1]
