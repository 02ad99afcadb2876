"""Kernel checks: branch conventions, recursion, round-trip properties."""

import random

import mpmath as mp
import pytest

from hnchain import PrecisionConfig, acos_c, acosh_c, hpc, precision_context, three_term_sequence

from conftest import close


def test_config_validation():
    with pytest.raises(ValueError):
        PrecisionConfig(bits=32)
    with pytest.raises(ValueError):
        PrecisionConfig(max_iter=0)
    with pytest.raises(ValueError):
        PrecisionConfig(tol="-1e-10")
    cfg = PrecisionConfig()
    assert cfg.bits == 256
    with precision_context(256):
        assert cfg.eps == mp.mpf("1e-30")


def test_hpc_exact_construction():
    with precision_context(192):
        z = hpc(3, -2)
        assert z.real == 3 and z.imag == -2
        assert hpc((1.5, 0.25)) == mp.mpc(1.5, 0.25)
        assert hpc(complex(0.5, -0.125)) == mp.mpc(0.5, -0.125)


def test_acos_identities(cfg):
    assert acos_c(1, cfg) == 0
    assert close(acos_c(0, cfg), mp.pi / 2, mp.mpf(10) * cfg.eps)


def test_acos_above_band_edge(cfg):
    # cos(i*0.6931...) = cosh(0.6931...) = 5/4, Im fixed positive on the cut
    w = acos_c(mp.mpf(5) / 4, cfg)
    assert w.real == 0 and w.imag > 0
    with cfg.context():
        assert close(mp.cos(w), mp.mpf(5) / 4, mp.mpf(10) * cfg.eps)
        assert close(w.imag, mp.log(2), mp.mpf(10) * cfg.eps)
    # left cut mirrors to Re = pi, Im >= 0
    w2 = acos_c(mp.mpf(-5) / 4, cfg)
    with cfg.context():
        assert close(w2.real, mp.pi, mp.mpf(10) * cfg.eps) and w2.imag > 0


def test_acosh_identities(cfg):
    assert acosh_c(1, cfg) == 0
    with cfg.context():
        assert close(acosh_c(mp.cosh(2), cfg), 2, mp.mpf(10) * cfg.eps)
        # (t_L + t_R)/(2 sqrt(t_L t_R)) at t_L=1, t_R=4 decays like ln 2 per site
        arg = mp.mpf(5) / (2 * mp.sqrt(mp.mpf(4)))
        assert close(acosh_c(arg, cfg), mp.log(2), mp.mpf(10) * cfg.eps)


def test_nonfinite_rejected(cfg):
    with pytest.raises(ValueError):
        acos_c(mp.inf, cfg)
    with pytest.raises(ValueError):
        acosh_c(mp.mpc(mp.nan, 0), cfg)


def test_three_term_basics():
    with precision_context(192):
        seq = three_term_sequence(mp.mpc("0.3", "0.1"), 7, 2, 0, 1)
        assert seq[2] == mp.mpc("0.3", "0.1")  # f2 = x for (f0, f1) = (0, 1)
        seq = three_term_sequence(0, 2, 3, 1, 0)
        assert seq[2] == -2 and seq[3] == 0
        with pytest.raises(ValueError):
            three_term_sequence(1, 1, -1, 0, 1)


def test_three_term_chebyshev():
    with precision_context(192):
        x = 2 * mp.cos(mp.pi / 4)
        seq = three_term_sequence(x, 1, 4, 0, 1)
        # f_j = sin(j pi/4)/sin(pi/4); j = 4 lands on a node
        assert abs(seq[4]) < mp.mpf(2) ** (-180)


def test_three_term_matches_closed_form():
    rng = random.Random(11)
    with precision_context(192):
        tol = mp.mpf("1e-25") * 10
        for _ in range(20):
            x = mp.mpc(rng.uniform(-3, 3), rng.uniform(-3, 3))
            y = mp.mpc(rng.uniform(-3, 3), rng.uniform(-3, 3))
            if abs(x * x - 4 * y) < mp.mpf("0.1"):
                continue
            disc = mp.sqrt(x * x - 4 * y)
            rp, rm = (x + disc) / 2, (x - disc) / 2
            seq = three_term_sequence(x, y, 12, 0, 1)
            for j in (3, 7, 12):
                ref = (rp ** j - rm ** j) / (rp - rm)
                assert abs(seq[j] - ref) <= tol * (1 + abs(ref))


def test_round_trip_grid():
    rng = random.Random(3)
    cfg = PrecisionConfig(bits=160, tol="1e-30")
    with cfg.context():
        tol = 10 * mp.mpf("1e-30")
        for _ in range(25):
            z = mp.mpc(rng.uniform(-10, 10), rng.uniform(-10, 10))
            assert abs(mp.cos(acos_c(z, cfg)) - z) <= tol * (1 + abs(z))
            assert abs(mp.cosh(acosh_c(z, cfg)) - z) <= tol * (1 + abs(z))


def test_doubling_precision_never_hurts():
    rng = random.Random(5)
    lo = PrecisionConfig(bits=128, tol="1e-60")
    hi = PrecisionConfig(bits=256, tol="1e-60")
    for _ in range(10):
        z = mp.mpc(rng.uniform(-10, 10), rng.uniform(-10, 10))
        with precision_context(512):
            res_lo = abs(mp.cos(acos_c(z, lo)) - z)
            res_hi = abs(mp.cos(acos_c(z, hi)) - z)
        assert res_hi <= res_lo + mp.mpf(2) ** (-500)
