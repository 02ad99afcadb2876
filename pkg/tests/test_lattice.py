"""Hamiltonian transcription, dispersions, symmetries, JSON round trips."""

import mpmath as mp
import numpy as np
import pytest

from hnchain import (
    ChainSpec,
    SSHSpec,
    aberth_roots,
    build_hatano_nelson,
    build_nr_ssh,
    chain_from_json,
    chain_to_json,
    dispersion_obc,
    dispersion_pbc,
    eigenvector_pair,
    full_spectrum,
    precision_context,
    ssh_bloch_spectrum,
    ssh_from_json,
    ssh_to_json,
)

from conftest import close, match_multisets


def test_spec_validation():
    with pytest.raises(ValueError):
        ChainSpec(1)
    with pytest.raises(ValueError):
        ChainSpec(5, impurity_site=6)
    with pytest.raises(ValueError):
        ChainSpec(5, t_left=0)
    with pytest.raises(ValueError):
        ChainSpec(5, boundary="ring")
    with pytest.raises(ValueError):
        SSHSpec(1)
    with pytest.raises(ValueError):
        SSHSpec(4, t2=0)
    with pytest.raises(ValueError):
        SSHSpec(4, impurity_sublattice="C")


def test_two_site_transcription():
    with precision_context(128):
        m = build_hatano_nelson(ChainSpec(2, 1, 2, 1, 1, "obc"))
        assert m.at(0, 0) == 1 and m.at(0, 1) == 1
        assert m.at(1, 0) == 2 and m.at(1, 1) == 0


def test_three_site_spectrum(cfg):
    with precision_context(192):
        m = build_hatano_nelson(ChainSpec(3, 1, 2, 0, 1, "obc"))
        roots = aberth_roots(m, cfg)
        assert match_multisets(roots, [-2, 0, 2], "1e-24")


def test_pbc_matches_ring_dispersion(cfg):
    with precision_context(192):
        spec = ChainSpec(3, 1, 2, 0, 1, "pbc")
        roots = aberth_roots(build_hatano_nelson(spec), cfg)
        expected = [dispersion_pbc(2 * mp.pi * n / 3, spec) for n in (1, 2, 3)]
        assert match_multisets(roots, expected, "1e-24")


def test_pbc_two_sites_adds_bonds():
    with precision_context(128):
        m = build_hatano_nelson(ChainSpec(2, 1, 2, 0, 1, "pbc"))
        # both bonds connect the same pair on a two-site ring
        assert m.at(0, 1) == 3 and m.at(1, 0) == 3


def test_ssh_transcription():
    with precision_context(128):
        spec = SSHSpec(3, t1="0.7", t2="1.5", gamma="0.2", delta="0.9",
                       impurity_cell=2, impurity_sublattice="B")
        m = build_nr_ssh(spec)
        assert close(m.at(0, 1), mp.mpf("0.9"), 0)    # a1 -> b1 row: t1 + gamma
        assert close(m.at(1, 0), mp.mpf("0.5"), 0)    # t1 - gamma
        assert m.at(2, 1) == mp.mpf("1.5") and m.at(1, 2) == mp.mpf("1.5")
        assert m.at(3, 3) == mp.mpf("0.9")            # delta on b2
        assert spec.impurity_site == 4


def test_ssh_gamma_kills_one_direction():
    with precision_context(128):
        m = build_nr_ssh(SSHSpec(2, t1=1, t2=1, gamma=1))
        assert m.at(1, 0) == 0 and m.at(0, 1) == 2


def test_ssh_dimerized_limit(cfg):
    with precision_context(192):
        m = build_nr_ssh(SSHSpec(2, t1=0, t2="1.5", gamma=0, delta=0))
        roots = aberth_roots(m, cfg)
        assert match_multisets(roots, [mp.mpf("-1.5"), 0, 0, mp.mpf("1.5")], "1e-20")


def test_dispersion_obc_points():
    with precision_context(192):
        spec = ChainSpec(4, 1, 2)
        assert abs(dispersion_obc(mp.pi / 2, spec)) < mp.mpf(2) ** (-180)
        assert close(dispersion_obc(mp.pi / 4, spec), 2, "1e-50")
        spec2 = ChainSpec(4, 1, 4)
        kd = mp.mpc(0, 1) * mp.acosh(mp.mpf(5) / 4)
        assert close(dispersion_obc(kd, spec2), 5, "1e-50")


def test_dispersion_pbc_points():
    with precision_context(192):
        spec = ChainSpec(4, 1, 2)
        assert close(dispersion_pbc(0, spec), 3, 0)
        assert close(dispersion_pbc(mp.pi / 2, spec), mp.mpc(0, -1), "1e-50")
        hermitian = ChainSpec(4, "1.3", "1.3")
        e = dispersion_pbc(mp.mpf("0.4"), hermitian)
        assert abs(e.imag) < mp.mpf(2) ** (-180)
        assert close(e, 2 * mp.mpf("1.3") * mp.cos(mp.mpf("0.4")), "1e-50")


def test_ssh_bloch_spectrum_points():
    with precision_context(192):
        spec = SSHSpec(4, t1="0.7", t2="1.1", gamma=0)
        plus, minus = ssh_bloch_spectrum(0, spec)
        assert close(plus, mp.mpf("1.8"), "1e-50") and close(minus, mp.mpf("-1.8"), "1e-50")
        spec2 = SSHSpec(4, t1="0.6", t2="1.1", gamma="0.6")
        plus2, _ = ssh_bloch_spectrum(mp.pi, spec2)
        assert close(plus2 * plus2, mp.mpf("1.1") ** 2 - 2 * mp.mpf("0.6") * mp.mpf("1.1"),
                     "1e-40")


def test_ssh_bloch_vs_two_cell_ring():
    # closing a 2-cell chain into a ring makes it Bloch-diagonalizable at
    # kappa = 0, pi; brute-force 4x4 eigenvalues must match both bands
    t1, t2, g = 0.0, 1.3, 0.4
    ring = np.zeros((4, 4), dtype=complex)
    for c in range(2):
        a, b = 2 * c, 2 * c + 1
        ring[a, b] += t1 + g
        ring[b, a] += t1 - g
        a_next = (2 * (c + 1)) % 4
        ring[a_next, b] += t2
        ring[b, a_next] += t2
    got = np.sort_complex(np.linalg.eigvals(ring))
    with precision_context(64):
        spec = SSHSpec(2, t1=t1, t2=t2, gamma=g)
        expected = []
        for kappa in (0, mp.pi):
            p, m = ssh_bloch_spectrum(kappa, spec)
            expected += [complex(p), complex(m)]
    assert np.allclose(np.sort_complex(np.array(expected)), got, atol=1e-12)


def test_sign_inversion_symmetry(cfg):
    with precision_context(192):
        plus = ChainSpec(7, 1, "1.7", "1.3", 3, "obc")
        minus = ChainSpec(7, 1, "1.7", "-1.3", 3, "obc")
        r_plus = aberth_roots(build_hatano_nelson(plus), cfg)
        r_minus = aberth_roots(build_hatano_nelson(minus), cfg)
        assert match_multisets([-z for z in r_plus], r_minus, "1e-22")


def test_left_right_exchange(cfg):
    with precision_context(192):
        spec = ChainSpec(5, 1, 2, "0.7", 2, "obc")
        swapped = ChainSpec(5, 2, 1, "0.7", 2, "obc")
        s1 = full_spectrum(build_hatano_nelson(spec), cfg)
        s2 = full_spectrum(build_hatano_nelson(swapped), cfg)
        assert match_multisets(s1.eigenvalues, s2.eigenvalues, "1e-22")
        # right eigenvectors of the swapped model are the left ones of the original
        for e1, left in zip(s1.eigenvalues, s1.left_vectors):
            right_sw, _ = eigenvector_pair(build_hatano_nelson(swapped), e1, cfg)
            dev = max(abs(a - b) for a, b in zip(left.amplitudes, right_sw.amplitudes))
            assert dev < mp.mpf("1e-22")


def test_reality_classes(cfg):
    with precision_context(192):
        real_case = aberth_roots(build_hatano_nelson(ChainSpec(6, 1, 2)), cfg)
        assert all(abs(z.imag) < mp.mpf("1e-30") for z in real_case)
        imag_case = aberth_roots(build_hatano_nelson(ChainSpec(6, 1, -2)), cfg)
        assert all(abs(z.real) < mp.mpf("1e-30") for z in imag_case)


def test_chain_json_round_trip():
    with precision_context(256):
        delta = "0.269986225543954509316686029167305996817846449"
        spec = ChainSpec(20, 1, 2, delta, 10, "obc")
        blob = chain_to_json(spec)
        back = chain_from_json(blob)
        assert back.n_sites == 20 and back.impurity_site == 10
        assert back.tL == spec.tL and back.tR == spec.tR
        assert back.dlt == spec.dlt
        assert chain_to_json(back) == blob


def test_ssh_json_round_trip():
    with precision_context(128):
        spec = SSHSpec(40, "0.5", 1, "0.4284", "0.595", 26, "A")
        back = ssh_from_json(ssh_to_json(spec))
        assert back == spec or (
            back.n_cells == spec.n_cells
            and mp.mpmathify(back.t1) == mp.mpmathify(spec.t1)
            and mp.mpmathify(back.gamma) == mp.mpmathify(spec.gamma)
        )
