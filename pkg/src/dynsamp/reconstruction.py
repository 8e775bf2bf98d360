"""From node estimates to the filter and the initial state.

The filter is recovered from its spectrum samples by a cosine-series fit, and
the state spectrum at the fold points by a transposed-Vandermonde solve; the
state itself then follows from exponential interpolation.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .errors import (ConfigError, InsufficientSamplesError, NodeCollisionError,
                     NumericalError)
from .estimators import default_L, estimate, is_degenerate
from .hankel import SpectralStack, build_stack, cadzow_denoise
from .signal import (Filter, MeasurementSet, State, add_spectral_noise, canonical_xi,
                     fold_points, trial_rng)

ILL_CONDITIONED = 1e12
MIN_GAP = 1e-9


class IllConditionedWarning(RuntimeWarning):
    pass


@dataclass
class SpectralSampleSet:
    """Pairs ``(eta, estimate of a_hat(eta))`` with the (xi, fold index) that produced each."""

    eta: np.ndarray
    values: np.ndarray
    source: list = field(default_factory=list)

    @classmethod
    def from_estimates(cls, estimates) -> "SpectralSampleSet":
        eta, vals, src = [], [], []
        for est in estimates:
            eta.extend(fold_points(est.xi, est.m))
            vals.extend(est.nodes)
            src.extend((est.xi, i) for i in range(est.m))
        return cls(np.asarray(eta, float), np.asarray(vals, complex), src)

    def folded(self) -> np.ndarray:
        e = np.mod(self.eta, 1.0)
        return np.minimum(e, 1.0 - e)


@dataclass
class FilterFit:
    filter: Filter
    residual: float
    condition: float
    max_imag: float
    ill_conditioned: bool


def recover_filter(samples: SpectralSampleSet, r: int) -> FilterFit:
    """Least-squares fit of ``c0 + sum_k c_k cos(2 pi k eta)`` to the samples.

    Complex estimates are projected to their real parts; the sequence taps are
    ``a(0) = c0`` and ``a(+-k) = c_k / 2``.
    """
    if r < 0:
        raise ConfigError("radius must be nonnegative")
    eta = samples.folded()
    order = np.argsort(eta)
    gaps = np.diff(eta[order])
    if gaps.size and np.min(gaps) <= MIN_GAP:
        raise NodeCollisionError("spectrum samples coincide after folding onto [0, 1/2]")
    if eta.size < r + 1:
        raise InsufficientSamplesError(f"need at least r+1={r + 1} distinct samples, got {eta.size}")
    A = np.cos(2 * np.pi * np.outer(eta, np.arange(r + 1)))
    b = samples.values.real
    cond = float(np.linalg.cond(A))
    sol = linalg.solve_least_squares(A, b)
    ill = cond > ILL_CONDITIONED
    if ill:
        warnings.warn(f"cosine system condition number {cond:.3g} exceeds {ILL_CONDITIONED:g}",
                      IllConditionedWarning, stacklevel=2)
    f = Filter.from_cosine(sol.x.real, check_normalized=False)
    return FilterFit(filter=f, residual=sol.residual, condition=cond,
                     max_imag=float(np.max(np.abs(samples.values.imag))) if samples.values.size else 0.0,
                     ill_conditioned=ill)


def recover_state_spectrum(stack: SpectralStack, nodes) -> np.ndarray:
    """State spectrum at the fold points from ``V^T xhat = m h_0``.

    Uses the (N-m) x m system; ``h_0`` carries the 1/m of the Poisson
    summation, hence the factor m on the right.
    """
    w = np.asarray(nodes, dtype=complex)
    m = stack.m
    if w.size != m:
        raise ConfigError(f"expected {m} nodes, got {w.size}")
    if m > 1:
        gaps = np.abs(w[:, None] - w[None, :])[~np.eye(m, dtype=bool)]
        if np.min(gaps) <= MIN_GAP:
            raise NodeCollisionError(
                f"nodes collide at xi={stack.xi:g}; pick a different xi away from 0 and 1/2")
    rows = stack.N - m
    h0 = stack.values[:rows]
    sol = linalg.solve_least_squares(linalg.vandermonde(w, rows).T, m * h0)
    return sol.x


def recover_state(freqs, xhat, r: int) -> State:
    """Solve ``sum_{n=-r}^{r} x(n) exp(-2 pi i n nu_j) = xhat_j`` in least squares."""
    nu = np.mod(np.asarray(freqs, dtype=float), 1.0)
    xhat = np.asarray(xhat, dtype=complex)
    if nu.size != xhat.size:
        raise ConfigError("frequency and value lists differ in length")
    distinct = np.unique(np.round(nu, 12))
    if distinct.size < 2 * r + 1:
        raise InsufficientSamplesError(
            f"need at least 2r+1={2 * r + 1} distinct frequencies, got {distinct.size}")
    E = np.exp(-2j * np.pi * np.outer(nu, np.arange(-r, r + 1)))
    cond = float(np.linalg.cond(E))
    if cond > ILL_CONDITIONED:
        raise NumericalError(f"exponential system is ill-conditioned (cond={cond:.3g}); "
                             "frequencies are clustered")
    return State(linalg.solve_least_squares(E, xhat).x)


def default_schedule(r: int, m: int) -> list:
    """Equispaced xi in (0.05, 0.45); enough for r+1 filter and 2r+1 state samples.

    For xi in (0, 1/2) the folded fold points of distinct xi never coincide, so
    each xi contributes m new distinct samples.
    """
    count = max(math.ceil((r + 1) / m), math.ceil((2 * r + 1) / m), 1)
    return [0.05 + 0.4 * (j + 0.5) / count for j in range(count)]


@dataclass
class RecoveryReport:
    filter_est: Filter
    state_est: State
    estimates: list
    filter_residual: float
    state_residual: float
    filter_condition: float
    max_node_imag: float
    ill_conditioned: bool = False

    def to_dict(self) -> dict:
        return {
            "filter": self.filter_est.to_dict(),
            "state": self.state_est.to_dict(),
            "estimates": [e.to_dict() for e in self.estimates],
            "residuals": {"cosine_system": self.filter_residual, "state_system": self.state_residual},
            "diagnostics": {"cosine_condition": self.filter_condition,
                            "max_node_imag": self.max_node_imag,
                            "ill_conditioned": self.ill_conditioned},
        }


def full_pipeline(ms: MeasurementSet, r: int, algorithm: str = "prony",
                  schedule: Optional[Sequence[float]] = None, L: Optional[int] = None,
                  cadzow: bool = False, rng: Optional[np.random.Generator] = None) -> RecoveryReport:
    """Estimate nodes at each scheduled xi, fit the filter, then recover the state.

    When the measurement set carries a noise spec, ``U(-eps, eps)`` complex
    noise is added to each stack's Fourier data (stream ``(seed, xi index)``
    unless ``rng`` is given).
    """
    m, N = ms.m, ms.N
    schedule = default_schedule(r, m) if schedule is None else [canonical_xi(v) for v in schedule]
    for xi in schedule:
        if is_degenerate(xi):
            raise ConfigError(f"schedule contains degenerate xi={xi:g}")
    if L is None:
        L = m if algorithm == "prony" else default_L(N, m)

    stacks, estimates = [], []
    for j, xi in enumerate(schedule):
        stack = build_stack(ms, xi, L)
        if ms.noise is not None and ms.noise.epsilon > 0:
            g = rng if rng is not None else trial_rng(ms.noise.seed, j)
            stack = stack.with_values(add_spectral_noise(stack.values, ms.noise.epsilon, g)[0])
        if cadzow:
            stack = cadzow_denoise(stack.with_L(m)).stack.with_L(L)
        stacks.append(stack)
        estimates.append(estimate(stack, algorithm, L=L))

    samples = SpectralSampleSet.from_estimates(estimates)
    fit = recover_filter(samples, r)

    freqs, xhats = [], []
    for stack in stacks:
        # nodes from the fitted filter: consistent across xi and already denoised
        w = fit.filter.response(fold_points(stack.xi, m))
        xhats.extend(recover_state_spectrum(stack, w))
        freqs.extend(fold_points(stack.xi, m))
    x_est = recover_state(freqs, xhats, r)
    E = np.exp(-2j * np.pi * np.outer(freqs, np.arange(-r, r + 1)))
    state_res = float(np.linalg.norm(E @ x_est.coeffs - np.asarray(xhats)))
    return RecoveryReport(filter_est=fit.filter, state_est=x_est, estimates=estimates,
                          filter_residual=fit.residual, state_residual=state_res,
                          filter_condition=fit.condition, max_node_imag=fit.max_imag,
                          ill_conditioned=fit.ill_conditioned)


def pad_to_radius(coeffs, r: int) -> np.ndarray:
    """Zero-pad a centered coefficient list to radius r (for comparisons)."""
    c = np.asarray(coeffs)
    have = c.size // 2
    if have > r:
        raise ConfigError(f"sequence radius {have} exceeds {r}")
    return np.pad(c, (r - have, r - have))
