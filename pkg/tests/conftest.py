import mpmath as mp
import pytest

from hnchain import PrecisionConfig


@pytest.fixture
def cfg():
    """Default test precision: fast but far beyond double."""
    return PrecisionConfig(bits=192, tol="1e-25")


def close(a, b, tol):
    return abs(mp.mpc(a) - mp.mpc(b)) <= mp.mpf(tol)


def sort_complex(values):
    return sorted(values, key=lambda z: (mp.mpc(z).real, mp.mpc(z).imag))


def match_multisets(got, expected, tol):
    """Greedy nearest matching; fine for well-separated spectra."""
    left = [mp.mpc(z) for z in expected]
    for g in got:
        g = mp.mpc(g)
        best = min(range(len(left)), key=lambda i: abs(left[i] - g))
        if abs(left[best] - g) > mp.mpf(tol):
            return False
        left.pop(best)
    return not left
