"""Node recovery at a single frequency: Prony, matrix pencil and ESPRIT.

Each estimator returns the filter spectrum at the fold points
``(xi + i) / m`` as a :class:`NodeEstimate` whose ``nodes[i]`` estimates
``a_hat((xi + i) / m)``. Index assignment uses the low-pass assumption: the
spectrum decreases with the distance of a frequency from the nearest integer.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ConfigError, DegenerateFrequencyError, RankDeficiencyError
from .hankel import SpectralStack, build_hankel, check_window
from .signal import canonical_xi, complex_to_pairs

ALGORITHMS = ("prony", "pencil", "esprit")
DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class PronyPolynomial:
    """Monic ``z^m + sum_k coeffs[k] z^k``."""

    coeffs: np.ndarray
    residual: float = 0.0

    @property
    def degree(self) -> int:
        return self.coeffs.size

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for c in self.coeffs[::-1]:
            out = out * z + c
        return out


@dataclass
class NodeEstimate:
    xi: float
    m: int
    nodes: np.ndarray
    raw_roots: np.ndarray
    algorithm: str
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "xi": self.xi,
            "m": self.m,
            "algorithm": self.algorithm,
            "nodes": complex_to_pairs(self.nodes),
            "diagnostics": {k: _jsonable(v) for k, v in self.diagnostics.items()},
        }


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist() if not np.iscomplexobj(v) else complex_to_pairs(v)
    return v


def is_degenerate(xi: float) -> bool:
    xi = canonical_xi(xi)
    return min(xi, 1 - xi) < DEGENERATE_TOL or abs(xi - 0.5) < DEGENERATE_TOL


def _require_generic(xi: float, what: str) -> None:
    if is_degenerate(xi):
        raise DegenerateFrequencyError(
            f"{what} needs xi outside {{0, 1/2}}; got xi={xi:g}, where fold points "
            "alias in pairs and the Hankel matrix is singular (use the degenerate solver)",
            xi=xi)


def fold_distances(xi: float, m: int) -> np.ndarray:
    """Distance of each fold point ``(xi + i)/m`` to the nearest integer."""
    u = np.mod((canonical_xi(xi) + np.arange(m)) / m, 1.0)
    return np.minimum(u, 1.0 - u)


def order_roots(raw, xi: float, m: int) -> np.ndarray:
    """Assign roots to fold indices: j-th largest real part -> j-th nearest to 0."""
    raw = np.asarray(raw, dtype=complex)
    if raw.size != m:
        raise ConfigError(f"expected {m} roots, got {raw.size}")
    d = fold_distances(xi, m)
    order_d = np.argsort(d, kind="stable")
    if m > 1:
        assert np.min(np.diff(d[order_d])) > DEGENERATE_TOL, "tied fold distances"
    by_value = raw[np.argsort(-raw.real, kind="stable")]
    out = np.empty(m, dtype=complex)
    out[order_d] = by_value
    return out


def prony_solve(stack: SpectralStack) -> PronyPolynomial:
    """Least-squares solution of ``H0 q = -h_m`` with the (N-m) x m Hankel matrix."""
    _require_generic(stack.xi, "Prony")
    m = stack.m
    Hfull = build_hankel(stack.with_L(m)).Hfull
    H0, hm = Hfull[:, :m], Hfull[:, m]
    sol = linalg.solve_least_squares(H0, -hm, rank_tol=1e-13)
    if sol.rank_deficient:
        raise RankDeficiencyError(
            f"Hankel matrix at xi={stack.xi:g} is numerically rank {sol.rank} < m={m}: "
            "the state spectrum likely vanishes at a fold point, or xi is near 0 or 1/2")
    return PronyPolynomial(coeffs=sol.x, residual=sol.residual)


def prony_roots(p: PronyPolynomial) -> np.ndarray:
    return linalg.eig(linalg.companion(p.coeffs))


def prony(stack: SpectralStack) -> NodeEstimate:
    p = prony_solve(stack)
    roots = prony_roots(p)
    return NodeEstimate(
        xi=stack.xi, m=stack.m, nodes=order_roots(roots, stack.xi, stack.m),
        raw_roots=roots, algorithm="prony",
        diagnostics={"system_residual": p.residual, "max_imag": float(np.max(np.abs(roots.imag)))},
    )


def degenerate_prony(stack: SpectralStack) -> NodeEstimate:
    """Prony at xi in {0, 1/2}, where only (m+1)/2 distinct nodes exist.

    Solves the (N-m) x (m+1)/2 system and copies each distinct node onto the
    fold indices that alias to it.
    """
    xi = stack.xi
    if not is_degenerate(xi):
        raise ConfigError(f"degenerate solver needs xi in {{0, 1/2}}, got {xi:g}")
    m = stack.m
    k = (m + 1) // 2
    Hfull = build_hankel(stack.with_L(m)).Hfull
    sol = linalg.solve_least_squares(Hfull[:, :k], -Hfull[:, k], rank_tol=1e-13)
    if sol.rank_deficient:
        raise RankDeficiencyError(
            f"reduced Hankel system at xi={xi:g} has rank {sol.rank} < {k}: "
            "the state spectrum likely cancels at an aliased pair of fold points")
    roots = linalg.eig(linalg.companion(sol.x))
    d = np.round(fold_distances(xi, m), 12)
    classes = np.unique(d)
    assert classes.size == k
    by_value = roots[np.argsort(-roots.real, kind="stable")]
    nodes = np.empty(m, dtype=complex)
    for value, dist in zip(by_value, classes):
        nodes[d == dist] = value
    return NodeEstimate(xi=xi, m=m, nodes=nodes, raw_roots=roots, algorithm="prony-degenerate",
                        diagnostics={"system_residual": sol.residual, "distinct_nodes": k})


def _signal_svd(stack: SpectralStack, m: int, L: int):
    check_window(m, stack.N, L)
    f = linalg.svd(build_hankel(stack.with_L(L)).Hfull)
    s = f.singular_values
    if s[0] == 0 or s.size < m or s[m - 1] <= 1e-13 * s[0]:
        raise RankDeficiencyError(
            f"Hankel matrix at xi={stack.xi:g} has fewer than m={m} nonzero singular values")
    ratio = float(s[m] / s[m - 1]) if s.size > m else 0.0
    return f, ratio


def matrix_pencil(stack: SpectralStack, m: int | None = None, L: int | None = None) -> NodeEstimate:
    """SVD-based matrix pencil with window L.

    Eigenvalues of ``pinv(W[:m, :L]) @ W[:m, 1:]`` are the m nodes plus
    ``L - m`` (near) zeros, which are discarded by modulus.
    """
    m = stack.m if m is None else m
    L = stack.L if L is None else L
    _require_generic(stack.xi, "matrix pencil")
    f, ratio = _signal_svd(stack, m, L)
    Wm = f.W[:m, :]
    pencil = linalg.pinv(Wm[:, :L]) @ Wm[:, 1:]
    eigs = linalg.eig(pencil)
    keep = np.argsort(-np.abs(eigs), kind="stable")[:m]
    roots = eigs[keep]
    discarded = np.delete(eigs, keep)
    return NodeEstimate(
        xi=stack.xi, m=m, nodes=order_roots(roots, stack.xi, m), raw_roots=roots,
        algorithm="pencil",
        diagnostics={"sv_ratio": ratio,
                     "max_discarded": float(np.max(np.abs(discarded))) if discarded.size else 0.0,
                     "L": L},
    )


def esprit(stack: SpectralStack, m: int | None = None, L: int | None = None) -> NodeEstimate:
    """Shift invariance of the leading m left singular vectors."""
    m = stack.m if m is None else m
    L = stack.L if L is None else L
    _require_generic(stack.xi, "ESPRIT")
    if stack.N - L < m + 1:
        raise ConfigError(f"ESPRIT needs N - L >= m + 1 (N={stack.N}, L={L}, m={m})")
    f, ratio = _signal_svd(stack, m, L)
    Us = f.U[:, :m]
    sol = linalg.solve_least_squares(Us[:-1], Us[1:])
    roots = linalg.eig(sol.x)
    return NodeEstimate(
        xi=stack.xi, m=m, nodes=order_roots(roots, stack.xi, m), raw_roots=roots,
        algorithm="esprit", diagnostics={"sv_ratio": ratio, "system_residual": sol.residual, "L": L},
    )


def default_L(N: int, m: int) -> int:
    return int(min(max(round(N / 3), m), N - m))


def estimate(stack: SpectralStack, algorithm: str = "prony", L: int | None = None,
             degenerate: bool = False) -> NodeEstimate:
    """Dispatch to one estimator; ``degenerate=True`` routes xi in {0, 1/2} to the reduced solver."""
    if degenerate and is_degenerate(stack.xi):
        return degenerate_prony(stack)
    if algorithm == "prony":
        return prony(stack)
    if algorithm == "pencil":
        return matrix_pencil(stack, L=L)
    if algorithm == "esprit":
        return esprit(stack, L=L)
    raise ConfigError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
