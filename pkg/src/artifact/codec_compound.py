"""Pulse-position codec that tolerates an unknown mean repetition rate.

The encoder only knows an interval [mu1, mu2] containing the true rate, so
equal spacing is out: the burst for message m is placed after N_m slots,
with the gaps growing geometrically so that even the fastest drift of an
earlier burst cannot reach the slowest possible position of a later one.
Burst widths B_m grow proportionally to N_m to keep every drifted burst
detectable, and the amplitude shrinks like 1/sqrt(B_m) so that every
codeword spends exactly the same energy.

The decoder sees only [mu1, mu2], delta, M: nothing rate-dependent enters
its window positions, lengths, or threshold.  Positions are 1-based.

Block length grows geometrically in M, so codewords are only materialized
on request and within an explicit cap; the experiment harness streams the
equivalent statistics instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _exact
from .channel import ChannelOutput, StateSequence
from .errors import InvalidConfigError
from .rng import as_generator

MAX_MATERIALIZED = 1 << 26  # refuse to allocate codewords beyond this many slots


@dataclass(frozen=True)
class CompoundSchemeParams:
    M: int
    epsilon: float
    delta: float
    mu1: float
    mu2: float
    sigma2: float  # variance bound for the admissible timing processes
    eta2: float
    x_star: float  # physical peak "energy budget" amplitude; burst m uses x_star/sqrt(B_m)
    threshold: float
    offsets: tuple[int, ...]  # N_m: slots before the burst of message m
    widths: tuple[int, ...]  # B_m: burst slot counts
    spacings: tuple[int, ...]  # region grid step per message (index 0 unused)
    window_lens: tuple[int, ...]
    regions: tuple[tuple[int, ...], ...]

    @property
    def block_len(self) -> int:
        return self.offsets[-1] + self.widths[-1]

    @property
    def energy(self) -> float:
        """Energy of every codeword: x_star^2, independent of the message."""
        return self.x_star ** 2

    def amplitude(self, m: int) -> float:
        return self.x_star / math.sqrt(self.widths[m - 1])


def derive_params(M: int, epsilon: float, delta: float, mu1: float, mu2: float,
                  sigma2: float, eta2: float = 1.0) -> CompoundSchemeParams:
    """Lay out the geometric burst schedule for a rate interval [mu1, mu2].

    The offset recursion N_m = ceil((mu2+delta)/(mu1-delta) * (N_{m-1} +
    B_{m-1})) guarantees, deterministically, that drifted windows of
    different messages never overlap; widths follow as B_m =
    floor((mu2-mu1+2*delta) * N_m).  delta = 0 is accepted for the exactly
    known-rate corner, but then mu2 must exceed mu1 or the widths vanish.
    """
    if M < 4:
        raise InvalidConfigError(f"need at least 4 messages, got {M}")
    if not (0.0 < epsilon < 1.0):
        raise InvalidConfigError(f"epsilon must be in (0, 1), got {epsilon}")
    if not (0.0 < mu1 <= mu2):
        raise InvalidConfigError(f"need 0 < mu1 <= mu2, got [{mu1}, {mu2}]")
    if not (0.0 <= delta < mu1):
        raise InvalidConfigError(f"delta must sit in [0, mu1), got {delta}")
    if not (sigma2 >= 0.0):
        raise InvalidConfigError(f"variance bound must be nonnegative, got {sigma2}")
    if not (eta2 > 0.0):
        raise InvalidConfigError(f"noise variance must be positive, got {eta2}")

    log2m = _exact.frac(math.log2(M))
    lo_rate = _exact.frac(mu1) - _exact.frac(delta)
    hi_rate = _exact.frac(mu2) + _exact.frac(delta)
    span = _exact.frac(mu2) - _exact.frac(mu1) + 2 * _exact.frac(delta)
    if span <= 0:
        raise InvalidConfigError(
            "mu2 - mu1 + 2*delta must be positive or every burst after the "
            "first is empty; widen delta or the rate interval")

    offsets = [0]
    widths = [_exact.floor_frac(log2m)]
    spacings = [0]
    for m in range(2, M + 1):
        n_m = _exact.ceil_frac(hi_rate * (offsets[-1] + widths[-1]) / lo_rate)
        b_m = _exact.floor_frac(span * n_m)
        if b_m < 1:
            raise InvalidConfigError(
                f"burst width for message {m} came out empty (N_{m}={n_m}); "
                "the rate window mu2 - mu1 + 2*delta is too narrow at this M")
        sp = _exact.floor_frac(Fraction(n_m) / log2m)
        if sp < 1:
            raise InvalidConfigError(
                f"region grid for message {m} collapsed below one position")
        offsets.append(n_m)
        widths.append(b_m)
        spacings.append(sp)

    window_lens = []
    for b_m in widths:
        w = _exact.floor_frac(lo_rate * b_m)
        if w < 1:
            raise InvalidConfigError(
                "detection window collapsed; mu1 - delta is too small for "
                f"burst width {b_m}")
        window_lens.append(w)

    regions: list[tuple[int, ...]] = [(1,)]
    for m in range(2, M + 1):
        n_m = offsets[m - 1]
        reg = _exact.multiples_between(spacings[m - 1],
                                       lo_rate * n_m + 1, hi_rate * n_m + 1)
        if not reg:
            raise InvalidConfigError(
                f"decision region for message {m} is empty; the grid step "
                "overshoots the drift interval at this size")
        regions.append(reg)

    log_m = math.log(M)
    x_star = (1.0 + delta) * math.sqrt(eta2) * math.sqrt(
        (2.0 + delta) * log_m / float(lo_rate))
    threshold = math.sqrt((2.0 + delta) * log_m)
    return CompoundSchemeParams(
        M=M, epsilon=float(epsilon), delta=float(delta), mu1=float(mu1),
        mu2=float(mu2), sigma2=float(sigma2), eta2=float(eta2),
        x_star=x_star, threshold=threshold,
        offsets=tuple(offsets), widths=tuple(widths),
        spacings=tuple(spacings), window_lens=tuple(window_lens),
        regions=tuple(regions))


@dataclass(frozen=True)
class ScheduleDiagnostics:
    """Exactly evaluated no-overlap inequalities for the burst schedule.

    offsets_separate:  (mu2+delta)*(N_m + B_m) <= (mu1-delta)*N_{m+1} for
                       every consecutive pair: the fastest possible image of
                       burst m ends before the slowest possible start of
                       burst m+1.
    windows_disjoint:  the last window of every region ends before the first
                       window of the next region begins.

    Both hold by construction of the offset recursion; they are evaluated in
    exact rational arithmetic rather than trusted.
    """

    offsets_separate: bool
    windows_disjoint: bool


def schedule_diagnostics(params: CompoundSchemeParams) -> ScheduleDiagnostics:
    lo_rate = _exact.frac(params.mu1) - _exact.frac(params.delta)
    hi_rate = _exact.frac(params.mu2) + _exact.frac(params.delta)
    separate = True
    disjoint = True
    for m in range(1, params.M):
        reach = hi_rate * (params.offsets[m - 1] + params.widths[m - 1])
        if reach > lo_rate * params.offsets[m]:
            separate = False
        last_end = params.regions[m - 1][-1] + params.window_lens[m - 1] - 1
        if last_end >= params.regions[m][0]:
            disjoint = False
    return ScheduleDiagnostics(offsets_separate=separate,
                               windows_disjoint=disjoint)


def window_length(m: int, params: CompoundSchemeParams) -> int:
    """Samples per detection window for message m: floor((mu1-delta) * B_m)."""
    if not (1 <= m <= params.M):
        raise ValueError(f"message {m} outside 1..{params.M}")
    return params.window_lens[m - 1]


def decision_region(m: int, params: CompoundSchemeParams) -> tuple[int, ...]:
    """Grid positions the burst of message m can drift to."""
    if not (1 <= m <= params.M):
        raise ValueError(f"message {m} outside 1..{params.M}")
    return params.regions[m - 1]


def encode(m: int, params: CompoundSchemeParams,
           max_len: int = MAX_MATERIALIZED) -> np.ndarray:
    """Materialize the codeword for message m (only sensible for small M)."""
    if not (1 <= m <= params.M):
        raise ValueError(f"message {m} outside 1..{params.M}")
    t = params.block_len
    if t > max_len:
        raise InvalidConfigError(
            f"block length {t} exceeds the materialization cap {max_len}; "
            "use the streaming simulator in the harness instead")
    x = np.zeros(t, dtype=np.float64)
    start = params.offsets[m - 1]
    x[start:start + params.widths[m - 1]] = params.amplitude(m)
    return x


def decode(y: ChannelOutput | np.ndarray, params: CompoundSchemeParams,
           seed=None) -> int | None:
    """Unique-region rule with per-message window lengths.

    The statistic for a window of region m is the window sum normalized by
    sqrt(window_lens[m]) in unit-noise coordinates; nothing here depends on
    the realized repetition rate.
    """
    samples = y.symbols if isinstance(y, ChannelOutput) else np.asarray(y)
    samples = samples.astype(np.float64, copy=False)
    max_end = max(reg[-1] + params.window_lens[i]
                  for i, reg in enumerate(params.regions)) - 1
    if max_end > samples.size:
        rng = as_generator(seed)
        pad = rng.normal(0.0, math.sqrt(params.eta2), size=max_end - samples.size)
        samples = np.concatenate([samples, pad])
    cs = np.concatenate(([0.0], np.cumsum(samples)))
    eta = math.sqrt(params.eta2)
    hits = []
    for m in range(1, params.M + 1):
        w = params.window_lens[m - 1]
        starts = np.asarray(params.regions[m - 1], dtype=np.int64)
        stats = (cs[starts - 1 + w] - cs[starts - 1]) / (math.sqrt(w) * eta)
        if np.any(stats >= params.threshold):
            hits.append(m)
    if len(hits) == 1:
        return hits[0]
    return None


@dataclass(frozen=True)
class TraceDiagnostics:
    """Drift events and geometry for one realized timing trace.

    The drift intervals are the rate-window ones: the prefix image must land
    in ((mu1-delta)*N_m, (mu2+delta)*N_m) and the burst image width in the
    matching interval for B_m.  full_burst_window_exists allows the analysis
    slack of N_m / log2(M) samples.
    """

    prefix_drift_out: bool
    burst_spread_out: bool
    wrong_windows_all_zero: bool
    full_burst_window_exists: bool
    prefix_output: int
    burst_output: int


def trace_diagnostics(m: int, states: StateSequence,
                      params: CompoundSchemeParams) -> TraceDiagnostics:
    if not (1 <= m <= params.M):
        raise ValueError(f"message {m} outside 1..{params.M}")
    if len(states) != params.block_len:
        raise ValueError("state trace length does not match the block")
    n_m = params.offsets[m - 1]
    b_m = params.widths[m - 1]
    a = int(states.states[:n_m].sum())
    g = int(states.states[n_m:n_m + b_m].sum())
    return geometry_diagnostics(m, a, g, params)


def geometry_diagnostics(m: int, prefix_output: int, burst_output: int,
                         params: CompoundSchemeParams) -> TraceDiagnostics:
    """Same evaluation from the two output-length sums alone."""
    if not (1 <= m <= params.M):
        raise ValueError(f"message {m} outside 1..{params.M}")
    b_m = params.widths[m - 1]
    n_m = params.offsets[m - 1]
    a = int(prefix_output)
    g = int(burst_output)

    lo_rate = _exact.frac(params.mu1) - _exact.frac(params.delta)
    hi_rate = _exact.frac(params.mu2) + _exact.frac(params.delta)
    e3 = n_m > 0 and not (lo_rate * n_m < a < hi_rate * n_m)
    e4 = not (lo_rate * b_m < g < hi_rate * b_m)

    silent = True
    for mm in range(1, params.M + 1):
        if mm == m:
            continue
        w = params.window_lens[mm - 1]
        for pos in params.regions[mm - 1]:
            if pos <= a + g and pos + w - 1 >= a + 1:
                silent = False
                break
        if not silent:
            break
    w = params.window_lens[m - 1]
    slack = params.offsets[m - 1] / math.log2(params.M)
    covered = False
    if g > 0:
        for pos in params.regions[m - 1]:
            overlap = min(pos + w - 1, a + g) - max(pos, a + 1) + 1
            if overlap >= w - slack:
                covered = True
                break
    return TraceDiagnostics(
        prefix_drift_out=e3, burst_spread_out=e4,
        wrong_windows_all_zero=silent, full_burst_window_exists=covered,
        prefix_output=a, burst_output=g)
