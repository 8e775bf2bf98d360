"""Spectral stacks, their Hankel matrices, and Cadzow denoising.

At a fixed frequency xi the Fourier data ``y_hat_0(xi), ..., y_hat_{N-1}(xi)``
behave like a sum of ``m`` damped exponentials whose nodes are the filter
spectrum at the fold points ``(xi + i) / m``. The Hankel matrix built from
that sequence has rank ``m`` and factors through Vandermonde matrices of the
nodes.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg
from .errors import ConfigError
from .signal import MeasurementSet, canonical_xi, spectrum_at

DEFAULT_CADZOW_THRESHOLD = 1e-10
DEFAULT_CADZOW_MAX_ITER = 100


@dataclass(frozen=True)
class SpectralStack:
    xi: float
    m: int
    N: int
    L: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "xi", canonical_xi(self.xi))
        if v.shape != (self.N,):
            raise ConfigError(f"stack needs {self.N} values, got shape {v.shape}")
        check_window(self.m, self.N, self.L)
        if not np.all(np.isfinite(v)):
            raise ConfigError("stack has non-finite values")

    def with_L(self, L: int) -> "SpectralStack":
        return replace(self, L=L)

    def with_values(self, values) -> "SpectralStack":
        return replace(self, values=np.asarray(values, dtype=complex))


def check_window(m: int, N: int, L: int) -> None:
    if not (m <= L <= N - m):
        raise ConfigError(f"window length L={L} must satisfy m <= L <= N - m (m={m}, N={N})")


@dataclass(frozen=True)
class HankelPair:
    """``Hfull[i, j] = y_hat_{i+j}`` of shape (N-L, L+1), and its two L-column windows."""

    Hfull: np.ndarray

    @property
    def H0(self) -> np.ndarray:
        return self.Hfull[:, :-1]

    @property
    def H1(self) -> np.ndarray:
        return self.Hfull[:, 1:]

    @property
    def L(self) -> int:
        return self.Hfull.shape[1] - 1

    def to_csv(self, path) -> None:
        """Debug dump; one row per matrix row, columns alternate re/im."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in self.Hfull:
                w.writerow([f"{x:.16e}" for v in row for x in (v.real, v.imag)])


@dataclass(frozen=True)
class NodeVectors:
    w: np.ndarray
    xhat: np.ndarray


def build_stack(ms: MeasurementSet, xi: float, L: int | None = None) -> SpectralStack:
    """Fourier data of every measurement sequence at xi (L defaults to m)."""
    L = ms.m if L is None else L
    check_window(ms.m, ms.N, L)
    xi = canonical_xi(xi)
    values = np.array([spectrum_at(y, xi) for y in ms.sequences], dtype=complex)
    return SpectralStack(xi=xi, m=ms.m, N=ms.N, L=L, values=values)


def hankel_from_values(values, rows: int) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    cols = values.size - rows + 1
    idx = np.arange(rows)[:, None] + np.arange(cols)[None, :]
    return values[idx]


def build_hankel(stack: SpectralStack) -> HankelPair:
    return HankelPair(hankel_from_values(stack.values, stack.N - stack.L))


def node_vectors(a, x, xi: float, m: int) -> NodeVectors:
    """Ground-truth nodes and state spectrum at the fold points (for checks)."""
    u = (canonical_xi(xi) + np.arange(m)) / m
    return NodeVectors(w=np.asarray(a.spectrum(u), dtype=complex),
                       xhat=np.asarray(x.spectrum(u), dtype=complex))


def factorization_residual(hp: HankelPair, nv: NodeVectors, s: int) -> float:
    """``||m H(s) - V^T diag(xhat) diag(w)^s V||_inf`` with V of shapes m x (N-L), m x L."""
    if s not in (0, 1):
        raise ConfigError("shift s must be 0 or 1")
    m = nv.w.size
    rows, L = hp.H0.shape
    H = hp.H1 if s else hp.H0
    rhs = linalg.vandermonde(nv.w, rows).T @ np.diag(nv.xhat * nv.w ** s) @ linalg.vandermonde(nv.w, L)
    return linalg.inf_norm(m * H - rhs)


def numerical_rank(hp: HankelPair, tol: float = 1e-8) -> int:
    """Number of singular values of H0 above ``tol * sigma_1``."""
    if not tol > 0:
        raise ConfigError("tol must be positive")
    s = linalg.svd(hp.H0).singular_values
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


@dataclass
class CadzowResult:
    stack: SpectralStack
    iterations: int
    converged: bool
    ratio: float
    ratio_history: list = field(default_factory=list)


def _sv_ratio(s: np.ndarray, m: int) -> float:
    if s.size <= m or s[m - 1] == 0:
        return 0.0
    return float(s[m] / s[m - 1])


def truncate_rank(H: np.ndarray, m: int) -> np.ndarray:
    f = linalg.svd(H)
    s = f.singular_values.copy()
    s[m:] = 0.0
    return (f.U * s) @ f.W


def antidiagonal_average(H: np.ndarray) -> np.ndarray:
    """Project onto Hankel matrices by averaging each anti-diagonal."""
    return hankel_from_values(antidiagonal_means(H), H.shape[0])


def antidiagonal_means(H: np.ndarray) -> np.ndarray:
    rows, cols = H.shape
    flipped = H[:, ::-1]
    out = np.empty(rows + cols - 1, dtype=complex)
    for k in range(rows + cols - 1):
        # offset o of the flipped matrix holds anti-diagonal i + j = cols - 1 - o
        d = np.diagonal(flipped, offset=cols - 1 - k)
        # averaging deviations keeps an already constant diagonal bit-exact
        out[k] = d[0] + np.mean(d - d[0])
    return out


def cadzow_denoise(stack: SpectralStack, m: int | None = None,
                   threshold: float = DEFAULT_CADZOW_THRESHOLD,
                   max_iter: int = DEFAULT_CADZOW_MAX_ITER) -> CadzowResult:
    """Alternate rank-m truncation and Hankel averaging until sigma_{m+1}/sigma_m < threshold.

    Runs on the ``(N-L) x (L+1)`` matrix of the stack. On hitting ``max_iter``
    the iterate with the smallest ratio is returned with ``converged=False``.
    """
    m = stack.m if m is None else m
    H = build_hankel(stack).Hfull
    ratio = _sv_ratio(linalg.svd(H).singular_values, m)
    history = [ratio]
    best_H, best_ratio = H, ratio
    it = 0
    while ratio >= threshold and it < max_iter:
        H = antidiagonal_average(truncate_rank(H, m))
        it += 1
        ratio = _sv_ratio(linalg.svd(H).singular_values, m)
        history.append(ratio)
        if ratio < best_ratio:
            best_H, best_ratio = H, ratio
    converged = ratio < threshold
    if not converged:
        H, ratio = best_H, best_ratio
    # first column followed by the last row recovers all N samples
    values = np.concatenate([H[:, 0], H[-1, 1:]])
    return CadzowResult(stack=stack.with_values(values), iterations=it,
                        converged=converged, ratio=ratio, ratio_history=history)
