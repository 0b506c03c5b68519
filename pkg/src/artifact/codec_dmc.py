"""Pulse-position codec for a repetition timing channel with a DMC back end.

A message m in {1, ..., M} is a burst of B copies of a designated nonzero
letter placed at the start of the m-th of M guard blocks of N slots each.
The receiver knows neither the block boundaries (timing is random) nor the
noise realization, so it slides a log-likelihood-ratio test over a small set
of candidate output positions per message (the decision regions) and declares
the unique message whose region fires.

All stream positions are 1-based.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _exact
from .channel import ChannelOutput, Dmc, StateDistribution, StateSequence
from .errors import InvalidConfigError
from .info import kl_divergence
from .rng import as_generator


class Hypothesis(enum.IntEnum):
    H0 = 0  # window reads like idle channel
    H1 = 1  # window reads like the burst


@dataclass(frozen=True)
class GuardDiagnostics:
    """Exactly evaluated spacing inequalities behind the decoder's geometry.

    regions_disjoint:            N*mu >= 3*nu (regions cannot touch)
    wrong_windows_clear:         (N-B)*mu >= 2*nu (windows of earlier regions
                                 cannot reach the burst image)
    wrong_windows_clear_jitter:  (N-B)*mu >= 2*nu + beta (same for later
                                 regions, burst spread included)

    Configs failing these are reported, not rejected; the error guarantees
    simply do not apply to them.
    """

    regions_disjoint: bool
    wrong_windows_clear: bool
    wrong_windows_clear_jitter: bool


@dataclass(frozen=True)
class DmcSchemeParams:
    """Derived constants for one (M, epsilon, delta, timing, back end) choice."""

    M: int
    epsilon: float
    delta: float
    mu: float
    sigma2: float
    x_star: int
    divergence: float
    N: int
    B: int
    beta: float
    nu: float
    window_len: int
    diagnostics: GuardDiagnostics
    threshold: float | None = None

    @property
    def codeword_len(self) -> int:
        return self.M * self.N

    def with_threshold(self, tau: float) -> "DmcSchemeParams":
        return replace(self, threshold=float(tau))


def _nu_sq(params) -> Fraction:
    return (4 * params.M * params.N) * _exact.frac(params.sigma2) / _exact.frac(params.epsilon)


def _beta_sq(params) -> Fraction:
    return (4 * params.B) * _exact.frac(params.sigma2) / _exact.frac(params.epsilon)


def derive_params(M: int, epsilon: float, delta: float,
                  idc: StateDistribution, channel: Dmc,
                  x_star: int) -> DmcSchemeParams:
    """Work out burst length, guard block, window and region radii.

    The burst length B targets (2+delta) * log2(M) / mu bits of discrimination
    against the idle hypothesis; the guard block N and the radii beta, nu are
    sized so that timing drift stays inside the regions except with
    probability epsilon/2.  The detection threshold is left unset; see
    calibrate_threshold.
    """
    if M < 2:
        raise InvalidConfigError(f"need at least 2 messages, got {M}")
    if not (0.0 < epsilon < 1.0):
        raise InvalidConfigError(f"epsilon must be in (0, 1), got {epsilon}")
    if not (delta > 0.0):
        raise InvalidConfigError(f"delta must be positive, got {delta}")
    if not (0 < x_star < channel.num_inputs):
        raise InvalidConfigError(f"burst letter {x_star} is not a nonzero input")
    mu, sigma2 = idc.mu, idc.sigma2
    if not (mu > 0):
        raise InvalidConfigError("timing process never emits anything (mu == 0)")

    div = kl_divergence(channel.w[x_star], channel.w[0])
    if math.isinf(div):
        raise InvalidConfigError(
            "the burst letter is noiselessly distinguishable from idle; "
            "a likelihood threshold is meaningless there, detect it directly")
    if div <= 0.0:
        raise InvalidConfigError(
            "the burst letter is indistinguishable from the zero letter")

    log2m = math.log2(M)
    B = _exact.floor_frac(
        _exact.frac(2.0 + delta) * _exact.frac(log2m)
        / (_exact.frac(mu) * _exact.frac(div)))
    if B < 1:
        raise InvalidConfigError(
            f"burst length came out empty (B={B}); increase M or delta")
    if sigma2 == 0.0:
        # Deterministic timing: the drift-control formula degenerates to
        # N = 0, but the codeword layout still needs one burst per block.
        N = B
    else:
        N = _exact.ceil_frac(
            (36 * M) * _exact.frac(sigma2)
            / (_exact.frac(mu) ** 2 * _exact.frac(epsilon)))
        if B > N:
            raise InvalidConfigError(
                f"burst (B={B}) does not fit in the guard block (N={N})")

    beta_sq = (4 * B) * _exact.frac(sigma2) / _exact.frac(epsilon)
    nu_sq = (4 * M * N) * _exact.frac(sigma2) / _exact.frac(epsilon)
    window_len = _exact.floor_minus_sqrt(Fraction(B) * _exact.frac(mu), beta_sq)
    if window_len < 1:
        raise InvalidConfigError(
            "detection window collapsed; timing jitter is too large for "
            f"this configuration (B*mu={B * mu:.3f}, beta={math.sqrt(float(beta_sq)):.3f})")

    nmu = Fraction(N) * _exact.frac(mu)
    clear = Fraction(N - B) * _exact.frac(mu)
    diagnostics = GuardDiagnostics(
        regions_disjoint=_exact.ge_sqrt(nmu, 9 * nu_sq),
        wrong_windows_clear=_exact.ge_sqrt(clear, 4 * nu_sq),
        wrong_windows_clear_jitter=_exact.ge_sum_sqrt(clear, 4 * nu_sq, beta_sq),
    )
    return DmcSchemeParams(
        M=M, epsilon=float(epsilon), delta=float(delta), mu=float(mu),
        sigma2=float(sigma2), x_star=int(x_star), divergence=float(div),
        N=N, B=B, beta=math.sqrt(float(beta_sq)), nu=math.sqrt(float(nu_sq)),
        window_len=window_len, diagnostics=diagnostics)


def encode(m: int, params: DmcSchemeParams) -> np.ndarray:
    """Codeword for message m: B copies of the burst letter at slot (m-1)N + 1."""
    if not (1 <= m <= params.M):
        raise ValueError(f"message {m} outside 1..{params.M}")
    x = np.zeros(params.codeword_len, dtype=np.int64)
    start = (m - 1) * params.N
    x[start:start + params.B] = params.x_star
    return x


def decision_region(m: int, params: DmcSchemeParams) -> tuple[int, ...]:
    """Candidate output positions for message m.

    Message 1 is anchored at position 1; message m >= 2 owns every integer
    within nu of (m-1)*N*mu + 1.  With zero jitter the radius degenerates and
    the region is the single center point.
    """
    if not (1 <= m <= params.M):
        raise ValueError(f"message {m} outside 1..{params.M}")
    if m == 1:
        return (1,)
    center = Fraction((m - 1) * params.N) * _exact.frac(params.mu) + 1
    return _exact.ints_in_open(center, _nu_sq(params))


@lru_cache(maxsize=32)
def _region_table(params: DmcSchemeParams):
    """All regions, flattened for vectorized testing: (starts, slice bounds)."""
    regions = [decision_region(m, params) for m in range(1, params.M + 1)]
    bounds = np.zeros(params.M + 1, dtype=np.int64)
    for i, reg in enumerate(regions):
        bounds[i + 1] = bounds[i] + len(reg)
    starts = np.fromiter((p for reg in regions for p in reg), dtype=np.int64,
                         count=int(bounds[-1]))
    return regions, starts, bounds


def _llr_tables(params: DmcSchemeParams, channel: Dmc):
    """Per-output-letter log-likelihood ratios, with impossibility masks.

    imp1 marks letters the burst cannot produce (W(y|x*) == 0): any such
    letter forces the window verdict to -inf.  imp0 marks letters idle cannot
    produce; absent imp1 letters they force +inf.
    """
    w1 = channel.w[params.x_star]
    w0 = channel.w[0]
    imp1 = w1 == 0.0
    imp0 = (w0 == 0.0) & ~imp1
    both = (w1 > 0.0) & (w0 > 0.0)
    llr = np.zeros(channel.num_outputs, dtype=np.float64)
    llr[both] = np.log2(w1[both] / w0[both])
    return llr, imp1, imp0


def _stats_from_counts(counts: np.ndarray, llr, imp1, imp0) -> np.ndarray:
    """Combine per-letter window counts into LLR statistics.

    counts[y, i] is how often letter y appears in window i.  The float
    accumulation order is fixed (ascending y), so two windows holding the
    same multiset of letters always produce bit-identical statistics; the
    calibrated threshold is a quantile of this very statistic and exact ties
    must stay ties.  Letters impossible under H0 force +inf, letters
    impossible under H1 force -inf, and -inf wins when both occur.
    """
    stats = np.zeros(counts.shape[1], dtype=np.float64)
    for y in range(llr.size):
        if llr[y] != 0.0:
            stats += counts[y] * llr[y]
    if imp0.any():
        stats[counts[imp0].sum(axis=0) > 0] = math.inf
    if imp1.any():
        stats[counts[imp1].sum(axis=0) > 0] = -math.inf
    return stats


def _window_stats(symbols: np.ndarray, starts: np.ndarray, window_len: int,
                  llr, imp1, imp0) -> np.ndarray:
    """LLR statistic for each 1-based window start, as a float array with infs.

    Letter counts come from integer cumulative sums, which are exact; no
    float cancellation can creep in between calibration and decoding.
    """
    lo = starts - 1
    hi = lo + window_len
    counts = np.empty((llr.size, starts.size), dtype=np.int64)
    for y in range(llr.size):
        cy = np.concatenate(([0], np.cumsum(symbols == y, dtype=np.int64)))
        counts[y] = cy[hi] - cy[lo]
    return _stats_from_counts(counts, llr, imp1, imp0)


def calibrate_threshold(params: DmcSchemeParams, channel: Dmc,
                        calibration_trials: int = 4096, seed=None) -> float:
    """Empirical detection threshold with missed detection at most epsilon/4.

    Draws calibration windows under the burst hypothesis and returns the
    largest cutoff tau such that the observed fraction of windows with
    statistic strictly below tau stays within epsilon/4.  Larger tau means
    fewer false alarms, so the quantile is taken from above.
    """
    if calibration_trials < 1:
        raise ValueError("need at least one calibration window")
    llr, imp1, imp0 = _llr_tables(params, channel)
    rng = as_generator(seed)
    w1 = channel.w[params.x_star]
    outs = rng.choice(channel.num_outputs,
                      size=(calibration_trials, params.window_len), p=w1)
    counts = np.empty((llr.size, calibration_trials), dtype=np.int64)
    for y in range(llr.size):
        counts[y] = (outs == y).sum(axis=1)
    stats = _stats_from_counts(counts, llr, imp1, imp0)
    k = int(math.floor(calibration_trials * params.epsilon / 4.0))
    return float(np.partition(stats, k)[k])


def hypothesis_test(window: np.ndarray, params: DmcSchemeParams,
                    channel: Dmc) -> Hypothesis:
    """Single-window burst-versus-idle test.  Boundary ties go to H1."""
    if params.threshold is None:
        raise InvalidConfigError("threshold not calibrated; run calibrate_threshold")
    arr = np.asarray(window, dtype=np.int64)
    if arr.shape != (params.window_len,):
        raise ValueError(
            f"window must have exactly {params.window_len} symbols, got {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() >= channel.num_outputs):
        raise ValueError("window symbol outside the output alphabet")
    llr, imp1, imp0 = _llr_tables(params, channel)
    stats = _window_stats(arr, np.array([1], dtype=np.int64), params.window_len,
                          llr, imp1, imp0)
    return Hypothesis.H1 if stats[0] >= params.threshold else Hypothesis.H0


def decode(y: ChannelOutput | np.ndarray, params: DmcSchemeParams,
           channel: Dmc, seed=None) -> int | None:
    """Declare the unique message whose region contains a firing window.

    Fires means the window statistic reaches the calibrated threshold.  If no
    region fires, or more than one does, the decoder gives up and returns
    None (counted as an error by the harness).  Windows running past the end
    of the received stream are completed with fresh idle-channel draws, which
    is what a receiver sampling a silent channel would see; pass a seed to
    make that padding reproducible.
    """
    if params.threshold is None:
        raise InvalidConfigError("threshold not calibrated; run calibrate_threshold")
    symbols = y.symbols if isinstance(y, ChannelOutput) else np.asarray(y)
    symbols = symbols.astype(np.int64, copy=False)
    regions, starts, bounds = _region_table(params)
    max_end = int(starts.max()) + params.window_len - 1
    if max_end > symbols.size:
        rng = as_generator(seed)
        pad = rng.choice(channel.num_outputs, size=max_end - symbols.size,
                         p=channel.w[0])
        symbols = np.concatenate([symbols, pad])
    llr, imp1, imp0 = _llr_tables(params, channel)
    stats = _window_stats(symbols, starts, params.window_len, llr, imp1, imp0)
    fired = stats >= params.threshold
    hits = [m for m in range(1, params.M + 1)
            if fired[bounds[m - 1]:bounds[m]].any()]
    if len(hits) == 1:
        return hits[0]
    return None


@dataclass(frozen=True)
class TraceDiagnostics:
    """What the realized timing states imply for one transmitted message.

    prefix_drift_out / burst_spread_out flag the two drift events the scheme
    budgets epsilon/4 each for.  When both are clear, the remaining fields
    certify the geometric picture the error analysis relies on: every window
    of a wrong region sees only idle symbols, and at least one window of the
    right region sits entirely inside the burst image.
    """

    prefix_drift_out: bool
    burst_spread_out: bool
    wrong_windows_all_zero: bool
    full_burst_window_exists: bool
    prefix_output: int
    burst_output: int


def trace_diagnostics(m: int, states: StateSequence,
                      params: DmcSchemeParams) -> TraceDiagnostics:
    """Evaluate the drift events and window/burst geometry from a state trace."""
    if len(states) != params.codeword_len:
        raise ValueError("state trace length does not match the codeword")
    prefix = (m - 1) * params.N
    a = int(states.states[:prefix].sum())
    g = int(states.states[prefix:prefix + params.B].sum())
    return geometry_diagnostics(m, a, g, params)


def geometry_diagnostics(m: int, prefix_output: int, burst_output: int,
                         params: DmcSchemeParams) -> TraceDiagnostics:
    """Same evaluation from the two output-length sums alone.

    Every field of TraceDiagnostics is a function of where the burst image
    lands, which is fully determined by the prefix output length and the
    burst image width; the streamed simulator uses this entry point.
    """
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
    own = slice(int(bounds[m - 1]), int(bounds[m]))
    others = np.concatenate([starts[:bounds[m - 1]], starts[bounds[m]:]])
    if g == 0:
        silent = True
        covered = False
    else:
        silent = not np.any((others >= a + 2 - w) & (others <= a + g))
        mine = starts[own]
        covered = bool(np.any((mine >= a + 1) & (mine + w - 1 <= a + g)))
    return TraceDiagnostics(
        prefix_drift_out=e3, burst_spread_out=e4,
        wrong_windows_all_zero=silent, full_burst_window_exists=covered,
        prefix_output=a, burst_output=g)
