"""Forward model: finite sequences, filters, states and their measurements.

A measurement set holds ``y_l = (a^l * x)(mZ)`` for ``l = 0..N-1``, i.e. the
evolving state subsampled on a coarse lattice after ``l`` applications of the
convolution filter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError

MONOTONE_GRID = 1024


def canonical_xi(xi: float) -> float:
    """Map a frequency on the torus to ``[0, 1)``."""
    v = float(xi) % 1.0
    return 0.0 if v == 1.0 else v


@dataclass(frozen=True)
class FiniteSequence:
    """Finitely supported sequence ``s(offset), ..., s(offset + len - 1)``."""

    offset: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if not np.all(np.isfinite(c)):
            raise ConfigError("sequence has non-finite entries")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "offset", int(self.offset))

    @classmethod
    def delta(cls, k: int = 0) -> "FiniteSequence":
        return cls(k, np.ones(1))

    @classmethod
    def centered(cls, coeffs) -> "FiniteSequence":
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if c.size % 2 != 1:
            raise ConfigError("centered sequence needs an odd number of entries")
        return cls(-(c.size // 2), c)

    @property
    def last(self) -> int:
        return self.offset + self.coeffs.size - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.coeffs.size)

    def __getitem__(self, k: int) -> complex:
        j = k - self.offset
        if 0 <= j < self.coeffs.size:
            return complex(self.coeffs[j])
        return 0j

    def to_dict(self) -> dict:
        return {"offset": self.offset, "coeffs": complex_to_pairs(self.coeffs)}

    @classmethod
    def from_dict(cls, d) -> "FiniteSequence":
        return cls(int(d["offset"]), pairs_to_complex(d["coeffs"]))


def complex_to_pairs(values) -> list:
    return [[float(v.real), float(v.imag)] for v in np.asarray(values, dtype=complex)]


def pairs_to_complex(pairs) -> np.ndarray:
    out = []
    for p in pairs:
        if isinstance(p, (list, tuple)):
            if len(p) != 2:
                raise ConfigError(f"complex value must be an [re, im] pair, got {p!r}")
            out.append(complex(float(p[0]), float(p[1])))
        else:
            out.append(complex(float(p), 0.0))
    return np.asarray(out, dtype=complex)


def convolve(f: FiniteSequence, g: FiniteSequence) -> FiniteSequence:
    return FiniteSequence(f.offset + g.offset, np.convolve(f.coeffs, g.coeffs))


def downsample(s: FiniteSequence, m: int) -> FiniteSequence:
    """``out(k) = s(m k)`` on the smallest window containing the support."""
    if m < 1:
        raise ConfigError("subsampling factor must be >= 1")
    lo = -((-s.offset) // m)  # ceil
    hi = s.last // m
    if hi < lo:
        return FiniteSequence(0, np.zeros(1))
    ks = np.arange(lo, hi + 1)
    return FiniteSequence(lo, s.coeffs[m * ks - s.offset])


def spectrum_at(s: FiniteSequence, xi) -> complex | np.ndarray:
    """Direct evaluation of ``sum_n s(n) exp(-2 pi i n xi)``; xi may be an array."""
    xi_arr = np.asarray(xi, dtype=float)
    phase = np.exp(-2j * np.pi * np.multiply.outer(xi_arr, s.indices))
    val = phase @ s.coeffs
    return complex(val) if xi_arr.ndim == 0 else val


class Filter:
    """Symmetric real FIR filter ``a(-r..r)``.

    ``is_monotone`` records whether the spectrum is strictly decreasing on
    ``[0, 1/2]`` (checked on a 1024-point grid); estimators rely on it but the
    type tolerates violations.
    """

    def __init__(self, coeffs, *, check_normalized: bool = True):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if c.size % 2 != 1:
            raise ConfigError("filter needs 2r+1 coefficients listed from -r to r")
        if not np.all(np.isfinite(c)):
            raise ConfigError("filter has non-finite coefficients")
        if not np.allclose(c, c[::-1], rtol=0, atol=1e-12):
            raise ConfigError("filter must be symmetric: a(k) == a(-k)")
        if check_normalized and abs(c.sum() - 1.0) > 1e-12:
            raise ConfigError(f"filter must be normalized (sum = 1), got sum {c.sum():.15g}")
        self.coeffs = 0.5 * (c + c[::-1])
        self.radius = c.size // 2
        grid = np.linspace(0.0, 0.5, MONOTONE_GRID)
        self.is_monotone = bool(np.all(np.diff(self.response(grid)) < 0))

    @classmethod
    def from_cosine(cls, cos_coeffs, **kw) -> "Filter":
        """Filter with spectrum ``c0 + sum_k c_k cos(2 pi k xi)``."""
        c = np.asarray(cos_coeffs, dtype=float)
        half = c[1:] / 2.0
        return cls(np.concatenate([half[::-1], c[:1], half]), **kw)

    @property
    def sequence(self) -> FiniteSequence:
        return FiniteSequence(-self.radius, self.coeffs)

    @property
    def cosine_coeffs(self) -> np.ndarray:
        r = self.radius
        return np.concatenate([self.coeffs[r:r + 1], 2.0 * self.coeffs[r + 1:]])

    def response(self, xi):
        """Real spectrum, evaluated from the cosine series."""
        xi = np.asarray(xi, dtype=float)
        k = np.arange(self.radius + 1)
        val = np.cos(2 * np.pi * np.multiply.outer(xi, k)) @ self.cosine_coeffs
        return float(val) if xi.ndim == 0 else val

    def spectrum(self, xi):
        return spectrum_at(self.sequence, xi)

    def to_dict(self) -> dict:
        return {"radius": self.radius, "coeffs": [float(v) for v in self.coeffs]}

    @classmethod
    def from_dict(cls, d) -> "Filter":
        coeffs = [pairs_to_complex([v])[0].real if isinstance(v, list) else float(v)
                  for v in d["coeffs"]]
        f = cls(coeffs)
        if "radius" in d and int(d["radius"]) != f.radius:
            raise ConfigError(f"radius {d['radius']} inconsistent with {len(coeffs)} coefficients")
        return f

    def __repr__(self):
        return f"Filter(radius={self.radius}, coeffs={self.coeffs.tolist()})"


class State:
    """Complex FIR initial state ``x(-r..r)``."""

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if c.size % 2 != 1:
            raise ConfigError("state needs 2r+1 coefficients listed from -r to r")
        if not np.all(np.isfinite(c)):
            raise ConfigError("state has non-finite coefficients")
        self.coeffs = c
        self.radius = c.size // 2

    @property
    def sequence(self) -> FiniteSequence:
        return FiniteSequence(-self.radius, self.coeffs)

    def spectrum(self, xi):
        return spectrum_at(self.sequence, xi)

    def to_dict(self) -> dict:
        return {"radius": self.radius, "coeffs": complex_to_pairs(self.coeffs)}

    @classmethod
    def from_dict(cls, d) -> "State":
        s = cls(pairs_to_complex(d["coeffs"]))
        if "radius" in d and int(d["radius"]) != s.radius:
            raise ConfigError(f"radius {d['radius']} inconsistent with {s.coeffs.size} coefficients")
        return s

    def __repr__(self):
        return f"State(radius={self.radius}, coeffs={self.coeffs.tolist()})"


def filter_power(a: Filter, l: int) -> FiniteSequence:
    if l < 0:
        raise ConfigError("filter power must be nonnegative")
    out = FiniteSequence.delta()
    for _ in range(l):
        out = convolve(out, a.sequence)
    return out


@dataclass(frozen=True)
class NoiseSpec:
    epsilon: float
    seed: int
    distribution: str = "uniform-complex"

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "seed": self.seed, "distribution": self.distribution}


@dataclass
class MeasurementSet:
    m: int
    N: int
    sequences: list
    noise: Optional[NoiseSpec] = None
    strict: bool = field(default=True, repr=False)

    def __post_init__(self):
        validate_geometry(self.m, self.N, strict=self.strict)
        if len(self.sequences) != self.N:
            raise ConfigError(f"expected {self.N} sequences, got {len(self.sequences)}")

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "N": self.N,
            "sequences": [s.to_dict() for s in self.sequences],
            "noise": None if self.noise is None else self.noise.to_dict(),
        }

    @classmethod
    def from_dict(cls, d) -> "MeasurementSet":
        noise = d.get("noise")
        return cls(
            m=int(d["m"]),
            N=int(d["N"]),
            sequences=[FiniteSequence.from_dict(s) for s in d["sequences"]],
            noise=None if noise is None else NoiseSpec(float(noise["epsilon"]), int(noise["seed"]),
                                                       noise.get("distribution", "uniform-complex")),
        )


def validate_geometry(m: int, N: int, strict: bool = True) -> None:
    if m < 1 or (strict and (m <= 1 or m % 2 == 0)):
        raise ConfigError(f"subsampling factor m must be an odd integer > 1, got {m}")
    if N < 2 * m:
        raise ConfigError(f"need N >= 2m temporal samples, got N={N}, m={m}")


def synthesize(a: Filter, x: State, m: int, N: int, *, strict: bool = True,
               noise: Optional[NoiseSpec] = None) -> MeasurementSet:
    """Exact measurements ``y_l = downsample(a^l * x, m)`` for ``l < N``.

    ``strict=False`` admits even ``m``, which only the conditioning studies use.
    """
    validate_geometry(m, N, strict=strict)
    seqs = []
    state = x.sequence
    for _ in range(N):
        seqs.append(downsample(state, m))
        state = convolve(state, a.sequence)
    return MeasurementSet(m=m, N=N, sequences=seqs, noise=noise, strict=strict)


def fold_points(xi: float, m: int) -> np.ndarray:
    """The m frequencies ``(xi + i) / m`` aliased onto xi by subsampling."""
    return (canonical_xi(xi) + np.arange(m)) / m


def poisson_spectrum(a: Filter, x: State, m: int, l: int, xi: float) -> complex:
    """Closed-form Fourier transform of ``y_l`` at xi via Poisson summation."""
    u = fold_points(xi, m)
    return complex(np.sum(a.spectrum(u) ** l * x.spectrum(u)) / m)


def add_spectral_noise(values, epsilon: float, rng: np.random.Generator):
    """Add ``U(-eps, eps) + i U(-eps, eps)`` to each value.

    Returns ``(noisy, perturbation)`` so callers can audit the draw.
    """
    if epsilon < 0:
        raise ConfigError("noise level must be nonnegative")
    values = np.asarray(values, dtype=complex)
    if epsilon == 0:
        return values.copy(), np.zeros_like(values)
    re = rng.uniform(-epsilon, epsilon, size=values.shape)
    im = rng.uniform(-epsilon, epsilon, size=values.shape)
    pert = re + 1j * im
    return values + pert, pert


def trial_rng(seed: int, *stream) -> np.random.Generator:
    """Independent generator for ``(seed, stream...)``; order of use is irrelevant."""
    return np.random.default_rng([int(seed), *[int(s) for s in stream]])


def random_admissible_instance(rng: np.random.Generator, r: int):
    """Random normalized monotone low-pass filter and well-conditioned state.

    The filter spectrum is ``alpha + (1 - alpha) * sum_j w_j ((1 + cos 2 pi xi)/2)^j``
    for ``j = 1..r`` with Dirichlet weights, so it is strictly decreasing on
    ``[0, 1/2]``. The state has ``x(0) = 1`` and the other taps share total
    modulus 0.6, keeping ``|x_hat| >= 0.4`` everywhere.
    """
    if r < 1:
        raise ConfigError("radius must be >= 1")
    weights = rng.dirichlet(np.ones(r))
    alpha = rng.uniform(-0.5, 0.0)
    # ((1 + cos)/2)^j == binomial kernel of radius j with taps C(2j, j+k) / 4^j.
    coeffs = np.zeros(2 * r + 1)
    for j, w in enumerate(weights, start=1):
        taps = np.array([math.comb(2 * j, i) for i in range(2 * j + 1)], dtype=float) / 4.0 ** j
        coeffs[r - j:r + j + 1] += (1 - alpha) * w * taps
    coeffs[r] += alpha
    a = Filter(coeffs / coeffs.sum())
    side = rng.normal(size=2 * r + 1) + 1j * rng.normal(size=2 * r + 1)
    side[r] = 0
    side *= 0.6 / np.abs(side).sum()
    side[r] = 1.0
    return a, State(side)


def cosine_example():
    """Filter with spectrum ``0.1 + 0.8 cos(2 pi xi) + 0.1 cos(4 pi xi)``, state ``0.383 + 0.484 cos(2 pi xi)``."""
    return Filter([0.05, 0.4, 0.1, 0.4, 0.05]), State([0.242, 0.383, 0.242])


def binomial_example():
    """Binomial filter (0.25, 0.5, 0.25) and the conjugate-symmetric radius-2 state."""
    x1 = 0.8976 + 0.4305j
    x2 = 0.9856 - 0.1682j
    return Filter([0.25, 0.5, 0.25]), State([np.conj(x2), np.conj(x1), 0.75, x1, x2])


def coerce_sequence(obj) -> FiniteSequence:
    if isinstance(obj, FiniteSequence):
        return obj
    if isinstance(obj, (Filter, State)):
        return obj.sequence
    if isinstance(obj, Sequence) or isinstance(obj, np.ndarray):
        return FiniteSequence(0, obj)
    raise TypeError(f"cannot interpret {type(obj).__name__} as a finite sequence")
