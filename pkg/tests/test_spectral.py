"""Solver checks: characteristic polynomial against brute force, root finding,
inverse iteration, the double-precision reference, and spectrum invariants."""

import itertools
import random

import mpmath as mp
import numpy as np
import pytest

from hnchain import (
    ChainSpec,
    ConvergenceError,
    DenseMatrix,
    PrecisionConfig,
    SSHSpec,
    aberth_roots,
    build_hatano_nelson,
    build_nr_ssh,
    char_poly_eval,
    eigenvector_pair,
    full_spectrum,
    precision_context,
    qr_reference,
)

from conftest import close, match_multisets


def brute_det(rows):
    n = len(rows)
    total = mp.mpc(0)
    for perm in itertools.permutations(range(n)):
        sign = 1
        seen = list(perm)
        for i in range(n):
            for j in range(i + 1, n):
                if seen[i] > seen[j]:
                    sign = -sign
        term = mp.mpc(sign)
        for i in range(n):
            term *= rows[i][perm[i]]
        total += term
    return total


def test_charpoly_two_site():
    with precision_context(192):
        m = build_hatano_nelson(ChainSpec(2, 1, 2, "0.5", 1, "obc"))
        for e in (mp.mpc("0.3", "0.7"), mp.mpc(-2), mp.mpc(0)):
            val, _ = char_poly_eval(m, e)
            direct = e * e - mp.mpf("0.5") * e - 2
            assert close(val, direct, "1e-50")


def test_charpoly_vanishes_at_eigenvalue():
    with precision_context(192):
        m = build_hatano_nelson(ChainSpec(3, 1, 2, 0, 1, "obc"))
        val, _ = char_poly_eval(m, 2)
        assert abs(val) < mp.mpf(2) ** (-180)


def test_charpoly_derivative_matches_finite_difference():
    with precision_context(256):
        m = build_hatano_nelson(ChainSpec(6, 1, 2, "0.9", 3, "pbc"))
        e = mp.mpc("0.37", "0.21")
        h = mp.mpf("1e-10")
        _, deriv = char_poly_eval(m, e)
        vp, _ = char_poly_eval(m, e + h)
        vm, _ = char_poly_eval(m, e - h)
        fd = (vp - vm) / (2 * h)
        assert abs(deriv - fd) <= mp.mpf("1e-18") * (1 + abs(deriv))


def test_charpoly_against_brute_force_small():
    rng = random.Random(17)
    with precision_context(128):
        for n in range(2, 7):
            for pbc in (False, True):
                entries = [[mp.mpc(0)] * n for _ in range(n)]
                for i in range(n):
                    entries[i][i] = mp.mpf(rng.randint(-3, 3))
                for i in range(n - 1):
                    entries[i][i + 1] = mp.mpf(rng.randint(1, 4))
                    entries[i + 1][i] = mp.mpf(rng.randint(1, 4))
                if pbc and n >= 3:
                    entries[0][n - 1] = mp.mpf(rng.randint(1, 4))
                    entries[n - 1][0] = mp.mpf(rng.randint(1, 4))
                m = DenseMatrix(n, tuple(tuple(r) for r in entries))
                e = mp.mpc(rng.uniform(-2, 2), rng.uniform(-2, 2))
                val, _ = char_poly_eval(m, e)
                shifted = [[entries[i][j] - (e if i == j else 0) for j in range(n)]
                           for i in range(n)]
                assert close(val, brute_det(shifted), "1e-25")


def test_charpoly_rejects_nonbanded():
    with precision_context(128):
        entries = [[mp.mpc(0)] * 4 for _ in range(4)]
        entries[0][2] = mp.mpc(1)
        with pytest.raises(ValueError):
            char_poly_eval(DenseMatrix(4, tuple(tuple(r) for r in entries)), 0)


def test_aberth_known_spectra(cfg):
    with precision_context(192):
        roots = aberth_roots(build_hatano_nelson(ChainSpec(3, 1, 2, 0, 1, "obc")), cfg)
        assert match_multisets(roots, [-2, 0, 2], "1e-24")
        golden = aberth_roots(build_hatano_nelson(ChainSpec(2, 1, 1, 1, 1, "obc")), cfg)
        phi = (1 + mp.sqrt(5)) / 2
        assert match_multisets(golden, [phi, 1 - phi], "1e-24")


def test_aberth_closed_form_midsize():
    cfg = PrecisionConfig(bits=128, tol="1e-20")
    with cfg.context():
        spec = ChainSpec(25, 1, 2, 0, 1, "obc")
        roots = aberth_roots(build_hatano_nelson(spec), cfg)
        s = mp.sqrt(mp.mpf(2))
        expected = [2 * s * mp.cos(n * mp.pi / 26) for n in range(1, 26)]
        assert match_multisets(roots, expected, "1e-20")


def test_aberth_convergence_error():
    cfg = PrecisionConfig(bits=128, tol="1e-20", max_iter=2)
    with cfg.context():
        with pytest.raises(ConvergenceError):
            aberth_roots(build_hatano_nelson(ChainSpec(12, 1, 2, 3, 4, "obc")), cfg)


def test_qr_reference_agrees_at_small_size(cfg):
    spec = ChainSpec(10, 1, 2, 0, 1, "obc")
    ev = qr_reference(build_hatano_nelson(spec))
    with precision_context(192):
        ab = aberth_roots(build_hatano_nelson(spec), cfg)
        assert match_multisets(ev, ab, "1e-8")


def test_qr_reference_hermitian_accurate(cfg):
    spec = ChainSpec(40, "1.5", "1.5", "0.3", 7, "obc")
    ev = qr_reference(build_hatano_nelson(spec))
    with precision_context(192):
        ab = aberth_roots(build_hatano_nelson(spec), cfg)
        assert match_multisets(ev, ab, "1e-12")


def test_qr_reference_general_matrix_path():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    entries = tuple(tuple(mp.mpc(v) for v in row) for row in a)
    ev = qr_reference(DenseMatrix(9, entries))
    ref = sorted(np.linalg.eigvals(a), key=lambda z: (z.real, z.imag))
    assert max(abs(x - y) for x, y in zip(ev, ref)) < 1e-11


def test_qr_reference_failure_phenomenology():
    # strongly non-normal chains scatter a purely real spectrum into the
    # complex plane once the eigenvalue condition numbers pass 1/eps_double;
    # the high-precision route keeps the same matrix exactly real
    spec = ChainSpec(40, 1, 9, 0, 1, "obc")
    ev = qr_reference(build_hatano_nelson(spec))
    assert max(abs(e.imag) for e in ev) > 1e-4
    cfg = PrecisionConfig(bits=128, tol="1e-20")
    with cfg.context():
        ab = aberth_roots(build_hatano_nelson(spec), cfg)
        assert all(abs(z.imag) < mp.mpf("1e-25") for z in ab)


def test_eigenvector_pair_hand_cases(cfg):
    with precision_context(192):
        m = build_hatano_nelson(ChainSpec(3, 1, 2, 0, 1, "obc"))
        right, left = eigenvector_pair(m, 0, cfg)
        mags = [abs(a) for a in right.amplitudes]
        ref = [1 / mp.sqrt(5), 0, 2 / mp.sqrt(5)]
        assert all(abs(a - b) < mp.mpf("1e-24") for a, b in zip(mags, ref))
        m2 = build_hatano_nelson(ChainSpec(3, 1, 1, 1, 2, "obc"))
        right2, _ = eigenvector_pair(m2, 2, cfg)
        ref2 = [1 / mp.sqrt(6), 2 / mp.sqrt(6), 1 / mp.sqrt(6)]
        assert all(abs(a - b) < mp.mpf("1e-24") for a, b in zip(right2.amplitudes, ref2))


def test_hermitian_left_is_conjugate_right(cfg):
    # even N and off-center impurity: no zero mode, whose equal-magnitude
    # entries (|t_R/t_L| = 1 here) would leave the phase convention untied
    with precision_context(192):
        spec = ChainSpec(6, mp.mpc(1, "0.5"), mp.mpc(1, "-0.5"), "0.8", 2, "obc")
        s = full_spectrum(build_hatano_nelson(spec), cfg)
        for right, left in zip(s.right_vectors, s.left_vectors):
            dev = max(abs(mp.conj(a) - b) for a, b in zip(right.amplitudes, left.amplitudes))
            assert dev < mp.mpf("1e-22")


def test_full_spectrum_residuals_and_biorthogonality(cfg):
    rng = random.Random(23)
    with precision_context(192):
        spec = ChainSpec(12, 1, mp.mpf(rng.uniform(1.2, 2.5)),
                         mp.mpc(rng.uniform(-2, 2), rng.uniform(-1, 1)), 4, "obc")
        s = full_spectrum(build_hatano_nelson(spec), cfg)
        assert max(s.residuals) <= cfg.eps
        tol = 10 * cfg.eps
        for i in range(len(s)):
            for j in range(len(s)):
                pairing = mp.fsum(a * b for a, b in zip(
                    s.left_vectors[i].amplitudes, s.right_vectors[j].amplitudes))
                if i != j:
                    assert abs(pairing) <= tol
                else:
                    assert abs(pairing) > tol


def test_trace_and_determinant_identities(cfg):
    with precision_context(192):
        spec = ChainSpec(9, 1, "1.6", "2.3", 4, "obc")
        m = build_hatano_nelson(spec)
        s = full_spectrum(m, cfg)
        total = mp.fsum(s.eigenvalues)
        assert close(total, mp.mpf("2.3"), 10 * cfg.eps)
        det, _ = char_poly_eval(m, 0)
        prod = mp.fprod(s.eigenvalues)
        assert abs(prod - det) <= 10 * cfg.eps * (1 + abs(det))


def test_gauge_similarity_invariance(cfg):
    with precision_context(192):
        spec = ChainSpec(10, 1, 2, "1.1", 4, "obc")
        m = build_hatano_nelson(spec)
        g = mp.sqrt(mp.mpf(2))
        entries = [[m.entries[i][j] * g ** (j - i) for j in range(10)] for i in range(10)]
        gauged = DenseMatrix(10, tuple(tuple(r) for r in entries))
        r1 = aberth_roots(m, cfg)
        r2 = aberth_roots(gauged, cfg)
        assert match_multisets(r1, r2, "1e-22")


def test_sorted_spectrum_negates_with_delta(cfg):
    with precision_context(192):
        s_plus = full_spectrum(build_hatano_nelson(ChainSpec(8, 1, 2, "1.7", 3, "obc")), cfg)
        s_minus = full_spectrum(build_hatano_nelson(ChainSpec(8, 1, 2, "-1.7", 3, "obc")), cfg)
        flipped = sorted((-e for e in s_plus.eigenvalues),
                         key=lambda z: (z.real, z.imag))
        dev = max(abs(a - b) for a, b in zip(flipped, s_minus.eigenvalues))
        assert dev < mp.mpf("1e-22")


def test_cluster_nullspace_path(cfg):
    # t1 = 0 two-cell chain has an exactly double zero eigenvalue whose
    # eigenvectors live on the dangling end sites
    with precision_context(192):
        m = build_nr_ssh(SSHSpec(2, t1=0, t2="1.5", gamma=0, delta=0))
        s = full_spectrum(m, cfg)
        assert match_multisets(s.eigenvalues, [mp.mpf("-1.5"), 0, 0, mp.mpf("1.5")], "1e-20")
        zero_modes = [v for e, v in zip(s.eigenvalues, s.right_vectors) if abs(e) < 1e-10]
        assert len(zero_modes) == 2
        for v in zero_modes:
            # supported on the dangling sites a_1, b_2 only
            assert abs(v.amplitudes[1]) < mp.mpf("1e-20")
            assert abs(v.amplitudes[2]) < mp.mpf("1e-20")


def test_spectrum_to_json_shape(cfg):
    with precision_context(192):
        s = full_spectrum(build_hatano_nelson(ChainSpec(4, 1, 2, 1, 2, "obc")), cfg)
        blob = s.to_json()
        assert set(blob) == {"eigenvalues", "residuals", "right", "left"}
        assert len(blob["eigenvalues"]) == 4
        assert len(blob["right"][0]) == 4 and len(blob["right"][0][0]) == 2
