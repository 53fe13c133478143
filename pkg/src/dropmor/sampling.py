"""Interpolation points (sigma_i, p_i) and tangential directions.

Random draws use a pinned generator: the PCG64 bit stream (``random_raw``,
whose output is fixed by numpy's stream-compatibility policy) mapped to
doubles as ``(x >> 11) * 2**-53`` and to normals by Box-Muller.  Nothing
depends on numpy's higher-level distribution samplers, which are allowed to
change between releases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class PinnedRNG:
    def __init__(self, seed: int):
        self._bits = np.random.PCG64(int(seed) & (2**64 - 1))

    def uniform(self, size: int) -> np.ndarray:
        raw = self._bits.random_raw(size)
        return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal(self, size: int) -> np.ndarray:
        npairs = (size + 1) // 2
        u1 = self.uniform(npairs)
        u2 = self.uniform(npairs)
        r = np.sqrt(-2.0 * np.log1p(-u1))  # 1 - u1 lies in (0, 1]
        theta = 2.0 * math.pi * u2
        z = np.empty(2 * npairs)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:size]


def log_freq_grid(omega_min: float, omega_max: float, N: int) -> list[complex]:
    """``N`` points ``i*omega`` with log-equispaced omega, both endpoints included."""
    if omega_min <= 0 or omega_max <= 0:
        raise ValueError("frequency bounds must be positive")
    if omega_max < omega_min:
        raise ValueError("omega_max must not be below omega_min")
    if N < 1:
        raise ValueError("N must be at least 1")
    if N == 1:
        return [complex(0.0, omega_min)]
    exps = np.linspace(math.log10(omega_min), math.log10(omega_max), N)
    return [complex(0.0, float(10.0**e)) for e in exps]


def random_param_grid(box: Sequence[Sequence[float]], N: int, seed: int) -> list[tuple[float, ...]]:
    if len(box) == 0:
        raise ValueError("parameter box is empty")
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    if np.any(hi < lo):
        raise ValueError("parameter box has an empty interval")
    u = PinnedRNG(seed).uniform(N * len(box)).reshape(N, len(box))
    pts = lo + u * (hi - lo)
    return [tuple(float(v) for v in row) for row in pts]


def random_tangent_dirs(dim: int, N: int, seed: int) -> list[np.ndarray]:
    if dim < 1:
        raise ValueError("dim must be positive")
    rng = PinnedRNG(seed)
    out = []
    while len(out) < N:
        v = rng.normal(dim)
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            continue
        out.append(v / nrm)
    return out


@dataclass(frozen=True)
class SamplePoint:
    sigma: complex
    param: tuple[float, ...] = ()
    right_dir: np.ndarray | None = field(default=None, compare=False)
    left_dir: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        for d in (self.right_dir, self.left_dir):
            if d is not None and abs(np.linalg.norm(d) - 1.0) > 1e-12:
                raise ValueError("tangential directions must have unit norm")


@dataclass(frozen=True)
class SampleSet:
    points: tuple[SamplePoint, ...]
    seed: int = 0
    spec: dict = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]


_MAX_REDRAWS = 100


def make_samples(omega_range: tuple[float, float], nfreq: int,
                 box: Sequence[Sequence[float]] = (), nparam: int | None = None,
                 seed: int = 0, pairing: str = "zip",
                 tangential: tuple[int, int] | None = None) -> SampleSet:
    """Build a sample set from a generation spec.

    ``pairing='zip'`` pairs frequency j with parameter j (needs equal counts);
    ``'tensor'`` takes every combination.  ``tangential=(m, p)`` attaches
    random unit right/left directions.  Duplicate (sigma, p) pairs are
    resolved by redrawing the parameter of the later point.
    """
    spec = dict(omega_range=list(map(float, omega_range)), nfreq=int(nfreq),
                box=[list(map(float, b)) for b in box], nparam=nparam,
                seed=int(seed), pairing=pairing,
                tangential=list(tangential) if tangential else None)
    freqs = log_freq_grid(omega_range[0], omega_range[1], nfreq)
    d = len(box)
    if d == 0:
        pairs = [(s, ()) for s in dict.fromkeys(freqs)]
    else:
        nparam = nfreq if nparam is None else nparam
        params = random_param_grid(box, nparam, seed)
        if pairing == "zip":
            if nparam != nfreq:
                raise ValueError("zip pairing needs as many parameters as frequencies")
            pairs = list(zip(freqs, params))
        elif pairing == "tensor":
            pairs = [(s, q) for q in params for s in freqs]
        else:
            raise ValueError(f"unknown pairing {pairing!r}")
        seen = set()
        redraw = 1
        for k, (s, q) in enumerate(pairs):
            tries = 0
            while (s, q) in seen:
                if tries == _MAX_REDRAWS:
                    raise ValueError(f"cannot draw a distinct parameter for sigma={s}; "
                                     "parameter box too narrow")
                q = random_param_grid(box, 1, seed + 7919 * redraw)[0]
                redraw += 1
                tries += 1
            seen.add((s, q))
            pairs[k] = (s, q)
    rdirs = ldirs = None
    if tangential is not None:
        m, p = tangential
        rdirs = random_tangent_dirs(m, len(pairs), seed + 1)
        ldirs = random_tangent_dirs(p, len(pairs), seed + 2)
    points = tuple(
        SamplePoint(complex(s), tuple(q),
                    None if rdirs is None else rdirs[k],
                    None if ldirs is None else ldirs[k])
        for k, (s, q) in enumerate(pairs))
    return SampleSet(points, int(seed), spec)
