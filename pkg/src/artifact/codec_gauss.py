"""Pulse-position codec for the timing channel with additive Gaussian noise.

Same block layout as the DMC codec (one burst of B slots inside the m-th of
M guard blocks of N slots), but the burst is a real amplitude chosen so each
codeword spends the same energy, the detector is a normalized window sum
against a fixed threshold, and the decision regions are thinned to multiples
of floor(M / log2(M)) so the number of tests per region stays logarithmic.

Positions are 1-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _exact
from .channel import ChannelOutput, StateDistribution, StateSequence
from .codec_dmc import GuardDiagnostics
from .errors import InvalidConfigError
from .rng import as_generator


@dataclass(frozen=True)
class GaussSchemeParams:
    M: int
    epsilon: float
    delta: float
    mu: float
    sigma2: float
    eta2: float
    N: int
    B: int
    beta: float
    nu: float
    window_len: int
    spacing: int
    x_star: float  # physical burst amplitude, noise scale folded in
    threshold: float  # in unit-noise coordinates
    diagnostics: GuardDiagnostics

    @property
    def codeword_len(self) -> int:
        return self.M * self.N

    @property
    def energy(self) -> float:
        """Energy of every codeword: B * x_star^2."""
        return self.B * self.x_star ** 2


def _nu_sq(params) -> Fraction:
    return (4 * params.M * params.N) * _exact.frac(params.sigma2) / _exact.frac(params.epsilon)


def _beta_sq(params) -> Fraction:
    return (4 * params.B) * _exact.frac(params.sigma2) / _exact.frac(params.epsilon)


def derive_params(M: int, epsilon: float, delta: float,
                  idc: StateDistribution, eta2: float = 1.0) -> GaussSchemeParams:
    """Size the burst, guard block, window, and amplitude.

    B grows like sqrt(M * N) * sigma / mu, which balances the energy spent
    per burst slot against the timing jitter; the amplitude then makes the
    total energy (1+delta)^2 * (2+delta) * eta2 * ln(M) / mu regardless of
    the rounding of B.  Requires jittery timing (sigma2 > 0): with
    deterministic timing the burst-length formula collapses to zero.
    """
    if M < 4:
        raise InvalidConfigError(f"need at least 4 messages, got {M}")
    if not (0.0 < epsilon < 1.0):
        raise InvalidConfigError(f"epsilon must be in (0, 1), got {epsilon}")
    if not (0.0 < delta < 1.0):
        raise InvalidConfigError(f"delta must be in (0, 1), got {delta}")
    if not (eta2 > 0.0):
        raise InvalidConfigError(f"noise variance must be positive, got {eta2}")
    mu, sigma2 = idc.mu, idc.sigma2
    if not (mu > 0):
        raise InvalidConfigError("timing process never emits anything (mu == 0)")

    N = _exact.ceil_frac((36 * M) * _exact.frac(sigma2)
                         / (_exact.frac(mu) ** 2 * _exact.frac(epsilon)))
    B = _exact.floor_sqrt_frac(
        (M * N) * _exact.frac(sigma2) / _exact.frac(mu) ** 2)
    if B < 1:
        raise InvalidConfigError(
            "burst length came out empty; the scheme needs timing jitter "
            f"(sigma2={sigma2}) and a larger M to have anything to detect")
    if B > N:
        raise InvalidConfigError(f"burst (B={B}) does not fit in the guard block (N={N})")
    spacing = _exact.floor_frac(Fraction(M) / _exact.frac(math.log2(M)))
    if spacing < 1:
        raise InvalidConfigError("region spacing collapsed below one position")

    beta_sq = (4 * B) * _exact.frac(sigma2) / _exact.frac(epsilon)
    nu_sq = (4 * M * N) * _exact.frac(sigma2) / _exact.frac(epsilon)
    window_len = _exact.floor_minus_sqrt(Fraction(B) * _exact.frac(mu), beta_sq)
    if window_len < 1:
        raise InvalidConfigError("detection window collapsed; jitter too large")

    log_m = math.log(M)
    x_star = (1.0 + delta) * math.sqrt(eta2) * math.sqrt(
        (2.0 + delta) * log_m / (B * mu))
    threshold = math.sqrt((2.0 + delta) * log_m)

    nmu = Fraction(N) * _exact.frac(mu)
    clear = Fraction(N - B) * _exact.frac(mu)
    diagnostics = GuardDiagnostics(
        regions_disjoint=_exact.ge_sqrt(nmu, 9 * nu_sq),
        wrong_windows_clear=_exact.ge_sqrt(clear, 4 * nu_sq),
        wrong_windows_clear_jitter=_exact.ge_sum_sqrt(clear, 4 * nu_sq, beta_sq),
    )
    params = GaussSchemeParams(
        M=M, epsilon=float(epsilon), delta=float(delta), mu=float(mu),
        sigma2=float(sigma2), eta2=float(eta2), N=N, B=B,
        beta=math.sqrt(float(beta_sq)), nu=math.sqrt(float(nu_sq)),
        window_len=window_len, spacing=spacing, x_star=x_star,
        threshold=threshold, diagnostics=diagnostics)
    for m in range(2, M + 1):
        if not decision_region(m, params):
            raise InvalidConfigError(
                f"decision region for message {m} is empty; "
                "the spacing grid misses the drift interval at this size")
    return params


def encode(m: int, params: GaussSchemeParams) -> np.ndarray:
    """Real-valued codeword for message m."""
    if not (1 <= m <= params.M):
        raise ValueError(f"message {m} outside 1..{params.M}")
    x = np.zeros(params.codeword_len, dtype=np.float64)
    start = (m - 1) * params.N
    x[start:start + params.B] = params.x_star
    return x


def decision_region(m: int, params: GaussSchemeParams) -> tuple[int, ...]:
    """Multiples of the spacing within nu of (m-1)*N*mu + 1 (message 1: just {1})."""
    if not (1 <= m <= params.M):
        raise ValueError(f"message {m} outside 1..{params.M}")
    if m == 1:
        return (1,)
    center = Fraction((m - 1) * params.N) * _exact.frac(params.mu) + 1
    return _exact.multiples_in_open(params.spacing, center, _nu_sq(params))


@lru_cache(maxsize=32)
def _region_table(params: GaussSchemeParams):
    regions = [decision_region(m, params) for m in range(1, params.M + 1)]
    bounds = np.zeros(params.M + 1, dtype=np.int64)
    for i, reg in enumerate(regions):
        bounds[i + 1] = bounds[i] + len(reg)
    starts = np.fromiter((p for reg in regions for p in reg), dtype=np.int64,
                         count=int(bounds[-1]))
    return regions, starts, bounds


def correlate(window: np.ndarray, params: GaussSchemeParams) -> float:
    """Normalized window sum in unit-noise coordinates."""
    arr = np.asarray(window, dtype=np.float64)
    if arr.shape != (params.window_len,):
        raise ValueError(
            f"window must have exactly {params.window_len} samples, got {arr.shape}")
    return float(arr.sum()) / (math.sqrt(params.window_len) * math.sqrt(params.eta2))


def decode(y: ChannelOutput | np.ndarray, params: GaussSchemeParams,
           seed=None) -> int | None:
    """Unique-region rule over normalized window sums.

    A window fires when its statistic reaches the threshold (ties go to the
    burst).  Windows running past the received stream are completed with
    fresh noise-only samples; pass a seed to pin that padding down.
    """
    samples = y.symbols if isinstance(y, ChannelOutput) else np.asarray(y)
    samples = samples.astype(np.float64, copy=False)
    regions, starts, bounds = _region_table(params)
    max_end = int(starts.max()) + params.window_len - 1
    if max_end > samples.size:
        rng = as_generator(seed)
        pad = rng.normal(0.0, math.sqrt(params.eta2), size=max_end - samples.size)
        samples = np.concatenate([samples, pad])
    cs = np.concatenate(([0.0], np.cumsum(samples)))
    lo = starts - 1
    stats = (cs[lo + params.window_len] - cs[lo]) / (
        math.sqrt(params.window_len) * math.sqrt(params.eta2))
    fired = stats >= params.threshold
    hits = [m for m in range(1, params.M + 1)
            if fired[bounds[m - 1]:bounds[m]].any()]
    if len(hits) == 1:
        return hits[0]
    return None


@dataclass(frozen=True)
class TraceDiagnostics:
    """Drift events and window/burst geometry implied by a state trace.

    full_burst_window_exists here allows the slack the analysis allows: some
    window of the right region overlaps the burst image in all but at most
    M / log2(M) of its samples.
    """

    prefix_drift_out: bool
    burst_spread_out: bool
    wrong_windows_all_zero: bool
    full_burst_window_exists: bool
    prefix_output: int
    burst_output: int


def trace_diagnostics(m: int, states: StateSequence,
                      params: GaussSchemeParams) -> TraceDiagnostics:
    if len(states) != params.codeword_len:
        raise ValueError("state trace length does not match the codeword")
    prefix = (m - 1) * params.N
    a = int(states.states[:prefix].sum())
    g = int(states.states[prefix:prefix + params.B].sum())
    return geometry_diagnostics(m, a, g, params)


def geometry_diagnostics(m: int, prefix_output: int, burst_output: int,
                         params: GaussSchemeParams) -> TraceDiagnostics:
    """Same evaluation from the two output-length sums alone."""
    if not (1 <= m <= params.M):
        raise ValueError(f"message {m} outside 1..{params.M}")
    prefix = (m - 1) * params.N
    a = int(prefix_output)
    g = int(burst_output)

    d = Fraction(a) - Fraction(prefix) * _exact.frac(params.mu)
    e3 = not (d == 0 or d * d < _nu_sq(params))
    db = Fraction(g) - Fraction(params.B) * _exact.frac(params.mu)
    e4 = not (db == 0 or db * db < _beta_sq(params))

    w = params.window_len
    regions, starts, bounds = _region_table(params)
    others = np.concatenate([starts[:bounds[m - 1]], starts[bounds[m]:]])
    if g == 0:
        silent = True
        covered = False
    else:
        silent = not np.any((others >= a + 2 - w) & (others <= a + g))
        mine = starts[bounds[m - 1]:bounds[m]]
        lo = np.maximum(mine, a + 1)
        hi = np.minimum(mine + w - 1, a + g)
        overlap = np.maximum(hi - lo + 1, 0)
        covered = bool(np.any(overlap >= w - params.M / math.log2(params.M)))
    return TraceDiagnostics(
        prefix_drift_out=e3, burst_spread_out=e4,
        wrong_windows_all_zero=silent, full_burst_window_exists=covered,
        prefix_output=a, burst_output=g)
