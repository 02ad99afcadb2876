"""Site-resolved amplitude profiles shared by the solver and diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp


@dataclass(frozen=True)
class ModeProfile:
    """Amplitudes over the chain sites, for one mode or an aggregate.

    ``amplitudes[j-1]`` is the amplitude on (1-based) site j. Single modes
    are L2-normalized with the largest-magnitude entry rotated real positive;
    aggregates (skin-effect weights) are plain nonnegative reals stored as
    mpc.
    """

    amplitudes: tuple
    label: str = "single_mode"
    energy: object = None

    def __post_init__(self):
        if self.label not in ("single_mode", "aggregate"):
            raise ValueError(f"unknown profile label {self.label!r}")

    def __len__(self) -> int:
        return len(self.amplitudes)

    def magnitudes(self) -> list:
        return [abs(a) for a in self.amplitudes]

    def norm(self) -> mp.mpf:
        return mp.sqrt(mp.fsum(abs(a) ** 2 for a in self.amplitudes))


def normalize_phase(vec) -> list:
    """L2-normalize and rotate the largest-magnitude entry real positive."""
    vec = [mp.mpc(v) for v in vec]
    norm = mp.sqrt(mp.fsum(abs(v) ** 2 for v in vec))
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    mags = [abs(v) for v in vec]
    k = max(range(len(vec)), key=lambda i: mags[i])
    phase = vec[k] / mags[k]
    scale = mp.conj(phase) / norm
    return [v * scale for v in vec]
