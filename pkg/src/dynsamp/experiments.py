"""Seeded noise experiments, error metrics and the two reproduction studies.

Noise is drawn in the Fourier domain, per stack, from generators keyed on
``(seed, ...)`` so that results do not depend on evaluation order.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import jsonschema
import numpy as np

from . import analysis
from .errors import ConfigError, DynSampError
from .estimators import ALGORITHMS, default_L, estimate
from .hankel import build_stack, cadzow_denoise, check_window
from .signal import (Filter, State, add_spectral_noise, fold_points, cosine_example,
                     binomial_example, synthesize, trial_rng, validate_geometry)

_complex = {"oneOf": [{"type": "number"},
                      {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}
_seq = {
    "type": "object",
    "required": ["coeffs"],
    "properties": {"radius": {"type": "integer", "minimum": 0},
                   "coeffs": {"type": "array", "items": _complex, "minItems": 1}},
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["filter", "state", "m", "N"],
    "additionalProperties": False,
    "properties": {
        "filter": _seq,
        "state": _seq,
        "m": {"type": "integer", "minimum": 3},
        "N": {"type": "integer", "minimum": 6},
        "L": {"type": "integer", "minimum": 1},
        "algorithm": {"enum": list(ALGORITHMS)},
        "cadzow": {"type": "boolean"},
        "cadzow_threshold": {"type": "number", "exclusiveMinimum": 0},
        "xi": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "noise": {"type": "number", "minimum": 0},
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "r": {"type": "integer", "minimum": 1},
        "degenerate": {"type": "boolean"},
        "output": {"type": "string"},
    },
}


@dataclass
class ExperimentConfig:
    filter: Filter
    state: State
    m: int
    N: int
    L: Optional[int] = None
    algorithm: str = "prony"
    cadzow: bool = False
    cadzow_threshold: float = 1e-10
    xi: list = field(default_factory=lambda: [0.3])
    noise: float = 0.0
    trials: int = 1
    seed: int = 0
    r: Optional[int] = None
    degenerate: bool = False
    output: Optional[str] = None

    def __post_init__(self):
        validate_geometry(self.m, self.N)
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.L is None:
            self.L = self.m if self.algorithm == "prony" else default_L(self.N, self.m)
        check_window(self.m, self.N, self.L)
        if self.r is None:
            self.r = max(self.filter.radius, self.state.radius)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(d, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"invalid config: {exc.message}") from exc
        kw = dict(d)
        kw["filter"] = Filter.from_dict(d["filter"])
        kw["state"] = State.from_dict(d["state"])
        return cls(**kw)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON ({exc})") from exc
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)


@dataclass
class ErrorRecord:
    e: np.ndarray
    e_best: float
    e_worst: float
    mse: float
    nodes: np.ndarray


def error_metrics(est_nodes, true_nodes) -> ErrorRecord:
    """Relative per-node errors, best/worst case and the normalized RMS error."""
    est = np.asarray(est_nodes, dtype=complex)
    true = np.asarray(true_nodes, dtype=complex)
    delta = np.abs(est - true)
    e = delta / np.max(np.abs(true))
    mse = math.sqrt(np.sum(delta ** 2) / np.sum(np.abs(true) ** 2))
    return ErrorRecord(e=e, e_best=float(e.min()), e_worst=float(e.max()), mse=mse, nodes=est)


@dataclass
class CellResult:
    label: str
    algorithm: str
    cadzow: bool
    m: int
    N: int
    L: int
    xi: float
    e_best: float
    e_worst: float
    mse: float
    trials: int
    failures: int
    records: list = field(default_factory=list, repr=False)

    def row(self) -> list:
        return [self.label, self.m, self.N, self.L, _fmt(self.xi), _fmt(self.e_best),
                _fmt(self.e_worst), _fmt(self.mse), self.trials, self.failures]


CELL_HEADER = ["algorithm", "m", "N", "L", "xi", "e_best", "e_worst", "mse", "trials", "failures"]


def _fmt(v: float) -> str:
    return f"{v:.16e}"


def run_cell(a: Filter, x: State, m: int, N: int, L: int, algorithm: str, xi: float,
             epsilon: float, trials: int, seed: int, cadzow: bool = False,
             cadzow_threshold: float = 1e-10, label: Optional[str] = None,
             stream: tuple = ()) -> CellResult:
    """Average error metrics over seeded trials at one (algorithm, N, L, xi).

    Trial t draws its noise from ``trial_rng(seed, *stream, t)``; estimator
    failures are counted and excluded from the averages.
    """
    exact = build_stack(synthesize(a, x, m, N), xi, L)
    truth = a.response(fold_points(xi, m))
    records, failures = [], 0
    for t in range(trials):
        noisy, _ = add_spectral_noise(exact.values, epsilon, trial_rng(seed, *stream, t))
        stack = exact.with_values(noisy)
        try:
            if cadzow:
                stack = cadzow_denoise(stack.with_L(m), threshold=cadzow_threshold).stack.with_L(L)
            est = estimate(stack, algorithm, L=L)
        except DynSampError:
            failures += 1
            continue
        records.append(error_metrics(est.nodes, truth))
    if records:
        e_best = float(np.mean([r.e_best for r in records]))
        e_worst = float(np.mean([r.e_worst for r in records]))
        mse = float(np.mean([r.mse for r in records]))
    else:
        e_best = e_worst = mse = math.nan
    return CellResult(label=label or algorithm + ("+cadzow" if cadzow else ""), algorithm=algorithm,
                      cadzow=cadzow, m=m, N=N, L=L, xi=float(xi), e_best=e_best, e_worst=e_worst,
                      mse=mse, trials=trials, failures=failures, records=records)


def run_trials(cfg: ExperimentConfig) -> list:
    return [run_cell(cfg.filter, cfg.state, cfg.m, cfg.N, cfg.L, cfg.algorithm, xi, cfg.noise,
                     cfg.trials, cfg.seed, cadzow=cfg.cadzow,
                     cadzow_threshold=cfg.cadzow_threshold, stream=(j,))
            for j, xi in enumerate(cfg.xi)]


# (label, algorithm, cadzow, N, L); labels 1, 2, 3 are Prony, pencil, ESPRIT and 4 is Cadzow
TABLE1_CELLS = (
    [("1", "prony", False, N, 5) for N in (10, 15, 20, 25)]
    + [("1+4", "prony", True, N, 5) for N in (10, 15, 20, 25)]
    + [("2", "pencil", False, N, L) for N, L in ((15, 5), (20, 6), (25, 8))]
    + [("3", "esprit", False, N, L) for N, L in ((15, 5), (20, 6), (25, 8))]
)
TABLE1_DEFAULT_EPSILON = 1e-6
TABLE1_XI = 0.3


def table1_experiment(epsilon: float = TABLE1_DEFAULT_EPSILON, trials: int = 100, seed: int = 0,
                      xi: float = TABLE1_XI) -> list:
    """Every cell of the comparison table on the m = 5 binomial-filter example.

    Noise streams are keyed on (seed, N, trial) so all algorithms at the same
    N see identical perturbations.
    """
    a, x = binomial_example()
    return [run_cell(a, x, 5, N, L, alg, xi, epsilon, trials, seed, cadzow=cz, label=label,
                     stream=(N,))
            for label, alg, cz, N, L in TABLE1_CELLS]


def cells_to_csv(cells, meta: Optional[dict] = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for k, v in (meta or {}).items():
        w.writerow([f"# {k}={v}"])
    w.writerow(CELL_HEADER)
    for c in cells:
        w.writerow(c.row())
    return buf.getvalue()


FIG2_XI = tuple(round(0.490 + 0.001 * i, 3) for i in range(9))
FIG2_M_LIST = tuple(range(2, 8))
FIG2_EPSILON = 1e-10


@dataclass
class Figure2Result:
    xi: np.ndarray
    hm_inv_norm: np.ndarray
    max_delta: np.ndarray
    delta_2: np.ndarray
    sep_2: np.ndarray      # delta_2 * delta_max^2
    sep_max: np.ndarray    # max_k delta_k * delta_max^2
    node_errors: np.ndarray
    node_bounds: np.ndarray
    growth: list

    def panels_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["xi", "hm_inv_norm", "max_abs_delta", "abs_delta_2", "delta_2_delta_sq",
                    "max_delta_k_delta_sq"])
        for row in zip(self.xi, self.hm_inv_norm, self.max_delta, self.delta_2, self.sep_2,
                       self.sep_max):
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def growth_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "hm_inv_norm"])
        for m, v in self.growth:
            w.writerow([m, _fmt(v)])
        return buf.getvalue()


def figure2_experiment(epsilon: float = FIG2_EPSILON, seed: int = 0, xis=FIG2_XI,
                       m_list=FIG2_M_LIST, growth_xi: float = 0.3) -> Figure2Result:
    """Conditioning study near xi = 1/2 on the m = 3 example, plus growth in m at xi = 0.3.

    One perturbation vector (drawn once from ``seed``) is added to the Fourier
    data at every xi, so differences between points reflect conditioning
    rather than the noise draw.
    """
    a, x = cosine_example()
    m, N = 3, 6
    ms = synthesize(a, x, m, N)
    _, pert = add_spectral_noise(np.zeros(N), epsilon, trial_rng(seed))
    cols = {k: [] for k in ("hinv", "maxd", "d2", "s2", "smax", "err", "bnd")}
    for xi in xis:
        stack = build_stack(ms, xi, m)
        truth = a.response(fold_points(xi, m))
        est = estimate(stack.with_values(stack.values + pert), "prony")
        err = np.abs(est.nodes - truth)
        prof = analysis.separation_profile(truth, xi, m)
        hinv = analysis.hm_inverse_norm(analysis.square_hankel(stack))
        rep = analysis.first_order_bounds(prof, hinv, float(np.max(np.abs(pert))))
        dmax2 = prof.delta_max ** 2
        cols["hinv"].append(hinv)
        cols["maxd"].append(err.max())
        cols["d2"].append(err[2])
        cols["s2"].append(prof.delta[2] * dmax2)
        cols["smax"].append(prof.delta_max * dmax2)
        cols["err"].append(err)
        cols["bnd"].append(rep.node_bounds)
    return Figure2Result(
        xi=np.asarray(xis, float), hm_inv_norm=np.array(cols["hinv"]), max_delta=np.array(cols["maxd"]),
        delta_2=np.array(cols["d2"]), sep_2=np.array(cols["s2"]), sep_max=np.array(cols["smax"]),
        node_errors=np.array(cols["err"]), node_bounds=np.array(cols["bnd"]),
        growth=analysis.growth_curve(a, x, growth_xi, m_list),
    )
