"""Monte Carlo experiment driver for the three pulse-position codecs.

One ExperimentConfig describes a full experiment: scheme, problem size,
timing process, back end, trial budget and seed.  run_trials produces a
Report with the observed error rate, a Wilson confidence interval, the
deterministic per-codeword cost, and diagnostic tallies of the drift events
the error analysis budgets for.

Reproducibility contract: a report is a pure function of its config.  Every
trial draws from its own seed spawned from base_seed, and results are merged
in trial order, so the worker count never changes the numbers.
"""

from __future__ import annotations

import copy
import csv
import itertools
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import norm as _norm

from . import _sparse, codec_compound, codec_dmc, codec_gauss
from .channel import (Dmc, GaussianNoise, StateDistribution, ids_channel,
                      state_dist_from_dict, state_dist_to_dict)
from .errors import InvalidConfigError
from .rng import as_generator

DIRECT_CAP_DEFAULT = 1 << 22  # largest stream the direct simulator will materialize

_SCHEMES = ("dmc", "gauss", "compound")
_SIMULATIONS = ("auto", "direct", "sparse")


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str
    M: int
    epsilon: float
    delta: float
    trials: int
    base_seed: int
    idc: StateDistribution
    dmc: Dmc | None = None  # back end for scheme "dmc"
    x_star: int = 1  # burst letter for scheme "dmc"
    eta2: float = 1.0  # noise variance for the Gaussian back ends
    mu1: float | None = None  # rate interval for scheme "compound"
    mu2: float | None = None
    sigma2_bound: float | None = None
    message_selection: str | int = "uniform"  # or "exhaustive", or a fixed message
    calibration_trials: int = 4096
    simulation: str = "auto"
    direct_cap: int = DIRECT_CAP_DEFAULT
    confidence: float = 0.95
    workers: int | None = None  # None: take ARTIFACT_THREADS, default 1

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise InvalidConfigError(
                f"unknown scheme {self.scheme!r}; expected one of {_SCHEMES}")
        if self.simulation not in _SIMULATIONS:
            raise InvalidConfigError(
                f"unknown simulation mode {self.simulation!r}; "
                f"expected one of {_SIMULATIONS}")
        if self.trials < 1:
            raise InvalidConfigError("need at least one trial")
        if not isinstance(self.idc, StateDistribution):
            raise InvalidConfigError("idc must be a StateDistribution")
        if not (0.0 < self.confidence < 1.0):
            raise InvalidConfigError("confidence must sit strictly inside (0, 1)")
        if self.direct_cap < 1:
            raise InvalidConfigError("direct_cap must be positive")
        if isinstance(self.message_selection, str):
            if self.message_selection not in ("uniform", "exhaustive"):
                raise InvalidConfigError(
                    "message_selection must be uniform, exhaustive, or a message")
        elif not (1 <= int(self.message_selection) <= self.M):
            raise InvalidConfigError(
                f"fixed message {self.message_selection} outside 1..{self.M}")
        if self.scheme == "dmc" and self.dmc is None:
            raise InvalidConfigError("scheme 'dmc' needs a back-end channel")
        if self.scheme == "compound" and None in (self.mu1, self.mu2,
                                                  self.sigma2_bound):
            raise InvalidConfigError(
                "scheme 'compound' needs mu1, mu2 and sigma2_bound")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise InvalidConfigError(
                f"unknown config keys: {', '.join(sorted(extra))}")
        kwargs = dict(d)
        if "idc" not in kwargs:
            raise InvalidConfigError("config needs an idc state distribution")
        kwargs["idc"] = state_dist_from_dict(kwargs["idc"])
        if kwargs.get("dmc") is not None:
            kwargs["dmc"] = Dmc.from_dict(kwargs["dmc"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        d = {
            "scheme": self.scheme, "M": self.M, "epsilon": self.epsilon,
            "delta": self.delta, "trials": self.trials,
            "base_seed": self.base_seed, "idc": state_dist_to_dict(self.idc),
            "x_star": self.x_star, "eta2": self.eta2,
            "message_selection": self.message_selection,
            "calibration_trials": self.calibration_trials,
            "simulation": self.simulation, "direct_cap": self.direct_cap,
            "confidence": self.confidence,
        }
        if self.dmc is not None:
            d["dmc"] = self.dmc.to_dict()
        for key in ("mu1", "mu2", "sigma2_bound", "workers"):
            val = getattr(self, key)
            if val is not None:
                d[key] = val
        return d


@dataclass(frozen=True)
class Report:
    config: ExperimentConfig
    trials: int
    errors: int
    error_rate: float
    error_ci_low: float
    error_ci_high: float
    codeword_cost: float  # deterministic input cost of every codeword
    rate_per_unit_cost: float  # log2(M) / codeword_cost
    simulation: str
    wall_time_s: float
    diagnostics: dict

    def to_dict(self) -> dict:
        d = asdict(self)
        d["config"] = self.config.to_dict()
        return d


def wilson_interval(errors: int, trials: int,
                    confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if not (0 <= errors <= trials):
        raise ValueError("error count outside 0..trials")
    z = float(_norm.ppf(0.5 + confidence / 2.0))
    phat = errors / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials
                         + z * z / (4 * trials * trials)) / denom
    # the score equation has roots exactly at 0 and 1 for degenerate phat;
    # the sqrt above only recovers them to a ulp
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials else min(1.0, center + half)
    return lo, hi


def derive_scheme_params(config: ExperimentConfig):
    """Scheme parameters for a config; the DMC threshold is left uncalibrated."""
    if config.scheme == "dmc":
        if config.dmc is None:
            raise InvalidConfigError("scheme dmc needs a dmc back end")
        return codec_dmc.derive_params(config.M, config.epsilon, config.delta,
                                       config.idc, config.dmc, config.x_star)
    if config.scheme == "gauss":
        return codec_gauss.derive_params(config.M, config.epsilon, config.delta,
                                         config.idc, config.eta2)
    if None in (config.mu1, config.mu2, config.sigma2_bound):
        raise InvalidConfigError(
            "scheme compound needs mu1, mu2 and sigma2_bound")
    params = codec_compound.derive_params(
        config.M, config.epsilon, config.delta, config.mu1, config.mu2,
        config.sigma2_bound, config.eta2)
    if not (config.mu1 - 1e-9 <= config.idc.mu <= config.mu2 + 1e-9):
        raise InvalidConfigError(
            f"realized timing rate {config.idc.mu} falls outside the design "
            f"interval [{config.mu1}, {config.mu2}]")
    return params


def codeword_cost(config: ExperimentConfig, params) -> float:
    if config.scheme == "dmc":
        return params.B * float(config.dmc.cost[params.x_star])
    return float(params.energy)


def _stream_length(config: ExperimentConfig, params) -> int:
    return params.block_len if config.scheme == "compound" else params.codeword_len


def _choose_simulation(config: ExperimentConfig, params) -> str:
    length = _stream_length(config, params)
    if config.scheme == "dmc":
        if config.simulation == "sparse":
            raise InvalidConfigError(
                "no streamed simulator exists for the DMC back end")
        if length > config.direct_cap:
            raise InvalidConfigError(
                f"codeword length {length} exceeds the direct cap "
                f"{config.direct_cap}")
        return "direct"
    if config.simulation == "direct" and length > config.direct_cap:
        raise InvalidConfigError(
            f"stream length {length} exceeds the direct cap "
            f"{config.direct_cap}; use simulation=sparse")
    if config.simulation == "auto":
        return "direct" if length <= config.direct_cap else "sparse"
    return config.simulation


@dataclass(frozen=True)
class _TrialOutcome:
    error: bool
    erased: bool  # decoder returned None rather than a wrong message
    diag: object


def _make_runner(config: ExperimentConfig, params, mode: str):
    if mode == "sparse":
        if config.scheme == "gauss":
            geom = _sparse.geometry_from_gauss(params)
            diag_fn = codec_gauss.geometry_diagnostics
        else:
            geom = _sparse.geometry_from_compound(params)
            diag_fn = codec_compound.geometry_diagnostics

        def run(m: int, ss) -> _TrialOutcome:
            res = _sparse.stream_trial(geom, m, config.idc, as_generator(ss))
            diag = diag_fn(m, res.prefix_output, res.burst_output, params)
            return _TrialOutcome(res.decoded != m, res.decoded is None, diag)

        return run

    if config.scheme == "dmc":
        def run(m: int, ss) -> _TrialOutcome:
            chan_ss, pad_ss = ss.spawn(2)
            x = codec_dmc.encode(m, params)
            y = ids_channel(x, config.idc, config.dmc, seed=chan_ss,
                            keep_trace=True)
            decoded = codec_dmc.decode(y, params, config.dmc, seed=pad_ss)
            diag = codec_dmc.trace_diagnostics(m, y.idc_trace, params)
            return _TrialOutcome(decoded != m, decoded is None, diag)

        return run

    if config.scheme == "gauss":
        codec, noise = codec_gauss, GaussianNoise(config.eta2)
    else:
        codec, noise = codec_compound, GaussianNoise(config.eta2)

    def run(m: int, ss) -> _TrialOutcome:
        chan_ss, pad_ss = ss.spawn(2)
        x = codec.encode(m, params)
        y = ids_channel(x, config.idc, noise, seed=chan_ss, keep_trace=True)
        decoded = codec.decode(y, params, seed=pad_ss)
        diag = codec.trace_diagnostics(m, y.idc_trace, params)
        return _TrialOutcome(decoded != m, decoded is None, diag)

    return run


def _draw_messages(config: ExperimentConfig, rng) -> np.ndarray:
    if config.message_selection == "uniform":
        return rng.integers(1, config.M + 1, size=config.trials)
    if config.message_selection == "exhaustive":
        return np.arange(config.trials, dtype=np.int64) % config.M + 1
    return np.full(config.trials, int(config.message_selection), dtype=np.int64)


def _worker_count(config: ExperimentConfig) -> int:
    if config.workers is not None:
        n = int(config.workers)
    else:
        n = int(os.environ.get("ARTIFACT_THREADS", "1"))
    if n < 1:
        raise InvalidConfigError(f"worker count must be positive, got {n}")
    return n


def run_trials(config: ExperimentConfig) -> Report:
    """Run the full experiment described by config.  Deterministic in config."""
    t0 = time.perf_counter()
    params = derive_scheme_params(config)
    mode = _choose_simulation(config, params)

    root = np.random.SeedSequence(config.base_seed)
    calib_ss, msg_ss, trial_root = root.spawn(3)
    if config.scheme == "dmc":
        tau = codec_dmc.calibrate_threshold(
            params, config.dmc, config.calibration_trials, seed=calib_ss)
        params = params.with_threshold(tau)

    messages = _draw_messages(config, as_generator(msg_ss))
    seeds = trial_root.spawn(config.trials)
    run = _make_runner(config, params, mode)

    workers = _worker_count(config)
    if workers == 1:
        outcomes = [run(int(m), ss) for m, ss in zip(messages, seeds)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, (int(m) for m in messages), seeds))

    errors = sum(o.error for o in outcomes)
    lo, hi = wilson_interval(errors, config.trials, config.confidence)
    tallies = {
        "erasures": sum(o.erased for o in outcomes),
        "prefix_drift_out": sum(o.diag.prefix_drift_out for o in outcomes),
        "burst_spread_out": sum(o.diag.burst_spread_out for o in outcomes),
        "wrong_windows_all_zero": sum(o.diag.wrong_windows_all_zero
                                      for o in outcomes),
        "full_burst_window_exists": sum(o.diag.full_burst_window_exists
                                        for o in outcomes),
        "drift_free": sum(not (o.diag.prefix_drift_out or
                               o.diag.burst_spread_out) for o in outcomes),
        "drift_free_clean": sum(
            not (o.diag.prefix_drift_out or o.diag.burst_spread_out)
            and o.diag.wrong_windows_all_zero
            and o.diag.full_burst_window_exists for o in outcomes),
    }
    if config.scheme == "compound":
        guards = asdict(codec_compound.schedule_diagnostics(params))
    else:
        guards = asdict(params.diagnostics)
    cost = codeword_cost(config, params)
    return Report(
        config=config, trials=config.trials, errors=int(errors),
        error_rate=errors / config.trials, error_ci_low=lo, error_ci_high=hi,
        codeword_cost=cost,
        rate_per_unit_cost=math.log2(config.M) / cost,
        simulation=mode, wall_time_s=time.perf_counter() - t0,
        diagnostics={"threshold": params.threshold, "guards": guards, **tallies})


_SWEEP_REPORT_COLUMNS = (
    "valid", "error", "trials", "errors", "error_rate", "error_ci_low",
    "error_ci_high", "codeword_cost", "rate_per_unit_cost", "simulation",
    "wall_time_s")


def sweep(grid: dict) -> tuple[list[str], list[dict]]:
    """Run the cartesian product of config overrides described by grid.

    grid = {"base": <config dict>, "axes": {<field>: [value, ...], ...}}.
    Returns (column names, rows); invalid points become rows with valid=False
    and the error message, never an exception.  An empty axis yields an empty
    table.
    """
    if "base" not in grid:
        raise InvalidConfigError("sweep grid needs a base config under 'base'")
    axes = grid.get("axes", {})
    if not isinstance(axes, dict):
        raise InvalidConfigError("axes must map config fields to value lists")
    names = list(axes)
    columns = ["point", *names, *_SWEEP_REPORT_COLUMNS]
    rows: list[dict] = []
    for point, values in enumerate(itertools.product(*axes.values())):
        d = copy.deepcopy(grid["base"])
        for name, val in zip(names, values):
            d[name] = copy.deepcopy(val)
        row = {"point": point}
        for name, val in zip(names, values):
            row[name] = json.dumps(val) if isinstance(val, (dict, list)) else val
        try:
            report = run_trials(ExperimentConfig.from_dict(d))
        except (InvalidConfigError, ValueError) as exc:
            row.update({c: "" for c in _SWEEP_REPORT_COLUMNS})
            row.update(valid=False, error=str(exc))
        else:
            row.update(
                valid=True, error="", trials=report.trials,
                errors=report.errors, error_rate=report.error_rate,
                error_ci_low=report.error_ci_low,
                error_ci_high=report.error_ci_high,
                codeword_cost=report.codeword_cost,
                rate_per_unit_cost=report.rate_per_unit_cost,
                simulation=report.simulation, wall_time_s=report.wall_time_s)
        rows.append(row)
    return columns, rows


def write_csv(columns: list[str], rows: list[dict], out) -> None:
    """Write sweep rows as CSV to a path or a file object."""
    if hasattr(out, "write"):
        writer = csv.DictWriter(out, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)
        return
    with open(out, "w", newline="") as fh:
        write_csv(columns, rows, fh)


@dataclass(frozen=True)
class CostEquivalenceReport:
    """Monte Carlo check that the timing channel preserves expected cost.

    The modified letter cost divides by the mean repetition rate, so the
    expected cost of the stretched input stream must equal the cost of the
    codeword itself.  Only burst slots matter on either side: zero letters
    cost nothing and their images cost nothing.
    """

    trials: int
    mu: float
    input_cost: float
    mean_output_cost: float
    std_error: float
    abs_difference: float
    tolerance: float  # 4 standard errors (exact match required when SE is 0)
    within_tolerance: bool
    max_trial_abs_diff: float

    def to_dict(self) -> dict:
        return asdict(self)


def verify_cost_equivalence(config: ExperimentConfig, trials: int | None = None,
                            seed=None) -> CostEquivalenceReport:
    """Estimate E[modified cost of the stretched codeword] and compare.

    Works on the letter-cost scheme (dmc).  The burst is the only costly part
    of any codeword and every message uses the same burst length, so the
    check is message-independent; it samples the burst slot states directly.
    """
    if config.scheme != "dmc":
        raise InvalidConfigError(
            "cost equivalence is defined for letter costs; use scheme dmc")
    params = derive_scheme_params(config)
    n = config.trials if trials is None else int(trials)
    if n < 2:
        raise InvalidConfigError("need at least two trials for a standard error")
    rng = as_generator(config.base_seed if seed is None else seed)
    letter_cost = float(config.dmc.cost[params.x_star])
    input_cost = params.B * letter_cost

    counts = rng.multinomial(params.B, config.idc.probabilities, size=n)
    sums = counts @ np.asarray(config.idc.values, dtype=np.float64)
    output_costs = (letter_cost / config.idc.mu) * sums

    mean_out = float(output_costs.mean())
    se = float(output_costs.std(ddof=1) / math.sqrt(n))
    diff = abs(mean_out - input_cost)
    within = diff <= 4.0 * se if se > 0.0 else diff == 0.0
    return CostEquivalenceReport(
        trials=n, mu=config.idc.mu, input_cost=input_cost,
        mean_output_cost=mean_out, std_error=se, abs_difference=diff,
        tolerance=4.0 * se, within_tolerance=within,
        max_trial_abs_diff=float(np.abs(output_costs - input_cost).max()))
