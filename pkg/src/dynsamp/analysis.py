"""Perturbation quantities for the square (N = 2m) Prony system.

Node separations, elementary symmetric functions, first-order error bounds
for the polynomial coefficients and the recovered nodes, and two-sided
estimates of ``||H_m^{-1}(xi)||_inf``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .errors import ConfigError, NodeCollisionError, NumericalError
from .hankel import HankelPair, build_hankel, build_stack
from .signal import Filter, State, fold_points, synthesize


def elementary_symmetric(nodes) -> np.ndarray:
    """``sigma_0..sigma_n`` of the nodes by incremental product expansion.

    ``prod_j (1 + w_j t) = sum_k sigma_k t^k``; each new node updates the
    coefficients at once.
    """
    w = np.asarray(nodes, dtype=complex)
    sigma = np.zeros(w.size + 1, dtype=complex)
    sigma[0] = 1.0
    for j, wj in enumerate(w, start=1):
        sigma[1:j + 1] = sigma[1:j + 1] + wj * sigma[0:j]
    return sigma


@dataclass
class SeparationProfile:
    xi: float
    m: int
    nodes: np.ndarray
    delta: np.ndarray
    sigma: np.ndarray
    sigma_missing: np.ndarray
    beta1: float
    beta2: np.ndarray

    @property
    def delta_max(self) -> float:
        return float(np.max(self.delta))


def separation_profile(nodes, xi: float = 0.0, m: int | None = None) -> SeparationProfile:
    w = np.asarray(nodes, dtype=complex)
    m = w.size if m is None else m
    if w.size != m:
        raise ConfigError(f"expected {m} nodes, got {w.size}")
    diff = np.abs(w[:, None] - w[None, :])
    np.fill_diagonal(diff, 1.0)
    if np.min(diff) == 0:
        raise NodeCollisionError("nodes must be pairwise distinct")
    delta = 1.0 / np.prod(diff, axis=1)
    sigma = elementary_symmetric(w)
    missing = np.array([elementary_symmetric(np.delete(w, i))[:m] for i in range(m)])
    # sigma_missing[i, k] = sigma_k with node i removed, k = 0..m-1
    beta1 = float(np.max(np.abs(sigma[1:]))) if m else 0.0
    beta2 = np.max(np.abs(missing), axis=1)
    return SeparationProfile(xi=xi, m=m, nodes=w, delta=delta, sigma=sigma,
                             sigma_missing=missing, beta1=beta1, beta2=beta2)


@dataclass
class BoundReport:
    hm_inv_norm: float
    epsilon: float
    coefficient_bound: float
    node_bounds: np.ndarray
    lower_bound: float = math.nan
    upper_bound: float = math.nan


def first_order_bounds(profile: SeparationProfile, hm_inv_norm: float, epsilon: float) -> BoundReport:
    """Leading-order bounds on coefficient and node errors for data error ``epsilon``."""
    if epsilon < 0:
        raise ConfigError("epsilon must be nonnegative")
    m = profile.m
    amp = 1.0 + m * profile.beta1
    coef = hm_inv_norm * amp * epsilon
    powers = np.abs(profile.nodes)[:, None] ** np.arange(m)[None, :]
    C = profile.delta * powers.sum(axis=1)
    return BoundReport(hm_inv_norm=hm_inv_norm, epsilon=epsilon, coefficient_bound=coef,
                       node_bounds=C * coef)


def square_hankel(stack) -> HankelPair:
    if stack.N != 2 * stack.m:
        raise ConfigError("the bounds apply to the square system, N = 2m")
    return build_hankel(stack.with_L(stack.m))


def hm_inverse_norm(H) -> float:
    """Infinity norm of the explicit inverse of a square Hankel matrix."""
    H = H.H0 if isinstance(H, HankelPair) else np.asarray(H, dtype=complex)
    if H.shape[0] != H.shape[1]:
        raise ConfigError(f"H_m must be square, got {H.shape}")
    s = linalg.svd(H).singular_values
    if s[0] == 0 or s[-1] / s[0] <= 1e-14:
        raise NumericalError("H_m is numerically singular")
    return linalg.inf_norm(np.linalg.inv(H))


def inverse_norm_bounds(profile: SeparationProfile, xhat) -> tuple:
    """Lower and upper estimates of ``||H_m^{-1}||_inf`` from nodes and state spectrum.

    lower = m max_i beta2_i delta_i / |xhat_i|
    upper = m max_i (delta_i prod_{j != i} (1 + |w_j|))^2 / |xhat_i|

    The upper estimate couples row i of both inverse-Vandermonde factors and is
    not a guaranteed bound (a max where the expansion gives a sum); see
    :func:`decoupled_upper_bound`.
    """
    xhat = np.abs(np.asarray(xhat, dtype=complex))
    m = profile.m
    if xhat.size != m:
        raise ConfigError(f"expected {m} state values, got {xhat.size}")
    if np.any(xhat == 0):
        raise NumericalError("state spectrum vanishes at a fold point")
    lower = m * np.max(profile.beta2 * profile.delta / xhat)
    upper = m * np.max((profile.delta * _others_growth(profile.nodes)) ** 2 / xhat)
    return float(lower), float(upper)


def _others_growth(w: np.ndarray) -> np.ndarray:
    a = 1.0 + np.abs(w)
    return np.array([np.prod(np.delete(a, i)) for i in range(w.size)])


def decoupled_upper_bound(profile: SeparationProfile, xhat) -> float:
    """Guaranteed upper bound ``m * sum_i G_i^2 / |xhat_i|``.

    ``G_i = delta_i prod_{j != i}(1 + |w_j|)``. Column i of the inverse
    Vandermonde matrix holds the Lagrange coefficients ``delta_i sigma^(i)``,
    so every entry and every column sum of it is at most ``G_i``. Expanding
    ``H_m^{-1} = m V^{-1} diag(1/xhat) V^{-T}`` row by row gives the sum.
    """
    xhat = np.abs(np.asarray(xhat, dtype=complex))
    G = profile.delta * _others_growth(profile.nodes)
    return float(profile.m * np.sum(G ** 2 / xhat))


def growth_curve(a: Filter, x: State, xi: float, m_list: Sequence[int]) -> list:
    """``(m, ||H_m^{-1}(xi)||_inf)`` for each m; singular cases yield NaN."""
    out = []
    for m in m_list:
        ms = synthesize(a, x, m, 2 * m, strict=False)
        try:
            val = hm_inverse_norm(square_hankel(build_stack(ms, xi, m)))
        except NumericalError:
            val = math.nan
        out.append((int(m), val))
    return out


def bounds_at(a: Filter, x: State, xi: float, m: int, epsilon: float) -> BoundReport:
    """Profile, inverse norm and all bounds for the exact instance at one xi."""
    u = fold_points(xi, m)
    profile = separation_profile(a.response(u), xi, m)
    stack = build_stack(synthesize(a, x, m, 2 * m), xi, m)
    hinv = hm_inverse_norm(square_hankel(stack))
    rep = first_order_bounds(profile, hinv, epsilon)
    rep.lower_bound, rep.upper_bound = inverse_norm_bounds(profile, x.spectrum(u))
    return rep


def write_bounds_csv(path, rows) -> None:
    """rows: iterable of (xi, m, value, lower, upper)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["xi", "m", "value", "lower", "upper"])
        for xi, m, value, lo, up in rows:
            w.writerow([f"{xi:.16e}", m, f"{value:.16e}", f"{lo:.16e}", f"{up:.16e}"])


def root_drift_exponents(p, dp, eps_list, roots=None, multiplicities=None) -> list:
    """Fit the exponent of root drift ``|z(eps) - z_k| ~ eps^e`` for ``p + eps dp``.

    ``p`` is given by its coefficients highest degree first (numpy.roots
    convention) and ``dp`` must have lower degree. For each distinct root the
    M_k perturbed roots nearest to it are tracked; the drift is the largest of
    their distances. A root that does not move beyond round-off gets exponent
    ``inf``. Returns a list of ``(root, multiplicity, exponent)``.
    """
    p = np.asarray(p, dtype=complex)
    dp = np.asarray(dp, dtype=complex)
    if dp.size >= p.size:
        raise ConfigError("perturbation must have lower degree than p")
    dp_full = np.concatenate([np.zeros(p.size - dp.size, dtype=complex), dp])
    if roots is None:
        roots, multiplicities = _cluster_roots(np.roots(p))
    elif multiplicities is None:
        multiplicities = [1] * len(roots)
    eps = np.asarray(eps_list, dtype=float)
    scale = max(1.0, float(np.max(np.abs(roots))))
    drifts = np.zeros((len(roots), eps.size))
    for j, e in enumerate(eps):
        pert = np.roots(p + e * dp_full)
        for k, (z, mult) in enumerate(zip(roots, multiplicities)):
            d = np.sort(np.abs(pert - z))[:mult]
            drifts[k, j] = d.max()
    out = []
    for k, (z, mult) in enumerate(zip(roots, multiplicities)):
        if np.all(drifts[k] <= 1e-12 * scale):
            out.append((complex(z), int(mult), math.inf))
            continue
        slope = np.polyfit(np.log(eps), np.log(np.maximum(drifts[k], 1e-300)), 1)[0]
        out.append((complex(z), int(mult), float(slope)))
    return out


def _cluster_roots(raw, tol: float = 1e-6):
    roots, mult = [], []
    for z in raw:
        for k, c in enumerate(roots):
            if abs(z - c) < tol:
                n = mult[k]
                roots[k] = (c * n + z) / (n + 1)
                mult[k] += 1
                break
        else:
            roots.append(z)
            mult.append(1)
    return roots, mult
