"""Timing channels with random symbol repetition, plus memoryless back ends.

The front end is driven by an iid nonnegative integer state process: when the
t-th input symbol meets state s[t], it is emitted s[t] times in a row (zero
times means the symbol is dropped).  The output length is the sum of the
states, so the receiver loses synchronization with the transmitter.  A
discrete memoryless channel or additive Gaussian noise can then corrupt the
desynchronized stream symbol by symbol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .errors import InvalidConfigError
from .rng import as_generator

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class StateDistribution:
    """Finite-support distribution of the repetition state.

    support holds (state, probability) pairs with integer states >= 0.
    The mean and variance are computed once and exposed as fields.
    """

    support: tuple[tuple[int, float], ...]
    mu: float = field(init=False)
    sigma2: float = field(init=False)

    def __post_init__(self):
        pairs = []
        seen = set()
        for entry in self.support:
            k, p = entry
            if not (isinstance(k, (int, np.integer)) and not isinstance(k, bool)):
                raise ValueError(f"state {k!r} is not an integer")
            k = int(k)
            p = float(p)
            if k < 0:
                raise ValueError(f"state {k} is negative")
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"probability {p} outside [0, 1]")
            if k in seen:
                raise ValueError(f"duplicate state {k} in support")
            seen.add(k)
            pairs.append((k, p))
        if not pairs:
            raise ValueError("empty support")
        total = math.fsum(p for _, p in pairs)
        if abs(total - 1.0) > _PROB_TOL:
            raise ValueError(f"support probabilities sum to {total!r}, not 1")
        pairs.sort()
        object.__setattr__(self, "support", tuple(pairs))
        mean = math.fsum(k * p for k, p in pairs)
        second = math.fsum(k * k * p for k, p in pairs)
        object.__setattr__(self, "mu", mean)
        object.__setattr__(self, "sigma2", max(0.0, second - mean * mean))

    @property
    def values(self) -> np.ndarray:
        return np.array([k for k, _ in self.support], dtype=np.int64)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.support], dtype=np.float64)

    @property
    def max_state(self) -> int:
        return self.support[-1][0]

    @classmethod
    def deletion(cls, d: float) -> "StateDistribution":
        """Each symbol independently dropped with probability d, else kept once."""
        if not (0.0 <= d <= 1.0):
            raise ValueError(f"deletion probability {d} outside [0, 1]")
        if d == 0.0:
            return cls(((1, 1.0),))
        if d == 1.0:
            return cls(((0, 1.0),))
        return cls(((0, d), (1, 1.0 - d)))

    @classmethod
    def constant(cls, k: int) -> "StateDistribution":
        """Deterministic repetition: every symbol emitted exactly k times."""
        return cls(((int(k), 1.0),))

    @classmethod
    def from_pmf(cls, pmf, coverage: float = 1.0 - 1e-12,
                 max_state: int = 1_000_000) -> "StateDistribution":
        """Truncate an unbounded pmf over {0, 1, 2, ...} and renormalize.

        States are accumulated in order until their mass reaches ``coverage``.
        """
        if not (0.0 < coverage <= 1.0):
            raise ValueError("coverage must be in (0, 1]")
        pairs = []
        mass = 0.0
        for k in range(max_state + 1):
            p = float(pmf(k))
            if p < 0:
                raise ValueError(f"pmf({k}) = {p} is negative")
            if p > 0:
                pairs.append((k, p))
                mass += p
            if mass >= coverage:
                break
        else:
            raise ValueError(f"coverage {coverage} not reached by state {max_state}")
        return cls(tuple((k, p / mass) for k, p in pairs))


@dataclass(frozen=True, eq=False)
class StateSequence:
    """A realized block of repetition states."""

    states: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.states, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("states must be one-dimensional")
        if arr.size and arr.min() < 0:
            raise ValueError("states must be nonnegative")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "states", arr)

    def __len__(self) -> int:
        return int(self.states.size)

    @property
    def output_length(self) -> int:
        return int(self.states.sum())


@dataclass(frozen=True, eq=False)
class Dmc:
    """Discrete memoryless channel with a designated zero input (index 0).

    w[x, y] is the probability of output y given input x; rows sum to one.
    cost[x] is the letter cost, with cost[0] == 0.
    """

    w: np.ndarray
    cost: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise ValueError("transition matrix must be 2-D and nonempty")
        if np.any(w < 0) or np.any(w > 1):
            raise ValueError("transition probabilities outside [0, 1]")
        rows = w.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > 1e-9):
            raise ValueError("transition matrix rows must sum to 1")
        cost = np.array(self.cost, dtype=np.float64)
        if cost.shape != (w.shape[0],):
            raise ValueError("cost vector length must match the input alphabet")
        if cost[0] != 0.0:
            raise ValueError("the zero symbol must have zero cost")
        if np.any(cost < 0) or not np.all(np.isfinite(cost)):
            raise ValueError("letter costs must be finite and nonnegative")
        w.setflags(write=False)
        cost.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "cost", cost)

    @property
    def num_inputs(self) -> int:
        return self.w.shape[0]

    @property
    def num_outputs(self) -> int:
        return self.w.shape[1]

    @classmethod
    def bsc(cls, crossover: float, cost=(0.0, 1.0)) -> "Dmc":
        p = float(crossover)
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"crossover {p} outside [0, 1]")
        return cls(np.array([[1 - p, p], [p, 1 - p]]), np.asarray(cost, dtype=float))

    @classmethod
    def identity(cls, n: int, cost=None) -> "Dmc":
        """Noiseless channel on n symbols (default cost: 0 for symbol 0, 1 otherwise)."""
        if cost is None:
            cost = [0.0] + [1.0] * (n - 1)
        return cls(np.eye(n), np.asarray(cost, dtype=float))

    def to_dict(self) -> dict:
        return {"w": self.w.tolist(), "cost": self.cost.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Dmc":
        try:
            return cls(np.array(d["w"], dtype=float), np.array(d["cost"], dtype=float))
        except KeyError as exc:
            raise InvalidConfigError(f"dmc spec is missing key {exc}") from exc


@dataclass(frozen=True)
class GaussianNoise:
    """Additive white Gaussian noise of variance eta2 per output sample."""

    eta2: float

    def __post_init__(self):
        if not (math.isfinite(self.eta2) and self.eta2 > 0):
            raise ValueError(f"noise variance must be positive, got {self.eta2}")

    @property
    def eta(self) -> float:
        return math.sqrt(self.eta2)


BackEnd = Union[Dmc, GaussianNoise]


@dataclass(frozen=True, eq=False)
class ChannelOutput:
    """Received stream, optionally carrying the realized state trace."""

    symbols: np.ndarray
    idc_trace: StateSequence | None = None

    def __post_init__(self):
        arr = np.asarray(self.symbols)
        if arr.ndim != 1:
            raise ValueError("channel output must be one-dimensional")
        object.__setattr__(self, "symbols", arr)
        if self.idc_trace is not None and self.idc_trace.output_length != arr.size:
            raise ValueError("state trace does not account for the output length")

    @property
    def length(self) -> int:
        return int(self.symbols.size)


def sample_states(dist: StateDistribution, block_length: int, seed=None) -> StateSequence:
    """Draw an iid block of repetition states."""
    if block_length < 0:
        raise ValueError("block length must be nonnegative")
    rng = as_generator(seed)
    states = rng.choice(dist.values, size=int(block_length), p=dist.probabilities)
    return StateSequence(states)


def idc_apply(x: np.ndarray, states: StateSequence) -> np.ndarray:
    """Emit each input symbol as many times as its state says.

    Output position l carries the input symbol whose cumulative state count
    first reaches l; np.repeat implements exactly that.
    """
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError("input must be one-dimensional")
    if arr.size != len(states):
        raise ValueError(
            f"input length {arr.size} does not match state block {len(states)}")
    return np.repeat(arr, states.states)


def dmc_apply(x: np.ndarray, channel: Dmc, seed=None) -> np.ndarray:
    """Pass integer symbols through the memoryless channel."""
    arr = np.asarray(x)
    if arr.size and (arr.min() < 0 or arr.max() >= channel.num_inputs):
        raise ValueError("input symbol outside the channel alphabet")
    arr = arr.astype(np.int64, copy=False)
    rng = as_generator(seed)
    out = np.empty(arr.size, dtype=np.int64)
    for sym in range(channel.num_inputs):
        mask = arr == sym
        n = int(mask.sum())
        if n:
            out[mask] = rng.choice(channel.num_outputs, size=n, p=channel.w[sym])
    return out


def gaussian_apply(x: np.ndarray, noise: GaussianNoise, seed=None) -> np.ndarray:
    """Add iid zero-mean Gaussian noise to a real-valued stream."""
    arr = np.asarray(x, dtype=np.float64)
    rng = as_generator(seed)
    return arr + rng.normal(0.0, noise.eta, size=arr.size)


def ids_channel(x: np.ndarray,
                idc: StateDistribution | StateSequence,
                back_end: BackEnd,
                seed=None,
                keep_trace: bool = False) -> ChannelOutput:
    """Timing front end followed by a memoryless back end.

    Passing a StateSequence forces that exact realization, in which case the
    seed feeds the back end alone; with a StateDistribution two independent
    substreams are split off for the states and the noise.
    """
    if isinstance(idc, StateSequence):
        states = idc
        back_rng = as_generator(seed)
    else:
        rng = as_generator(seed)
        state_rng, back_rng = rng.spawn(2)
        states = sample_states(idc, np.asarray(x).size, state_rng)
    stretched = idc_apply(x, states)
    if isinstance(back_end, Dmc):
        received = dmc_apply(stretched, back_end, back_rng)
    elif isinstance(back_end, GaussianNoise):
        received = gaussian_apply(stretched, back_end, back_rng)
    else:
        raise TypeError(f"unsupported back end {type(back_end).__name__}")
    return ChannelOutput(received, states if keep_trace else None)


def cost_of(x: np.ndarray, cost) -> float:
    """Total letter cost of a block.

    cost may be an array indexed by symbol or a mapping symbol -> cost.
    """
    arr = np.asarray(x)
    if isinstance(cost, Mapping):
        try:
            return float(math.fsum(cost[int(s)] for s in arr))
        except KeyError as exc:
            raise ValueError(f"no cost defined for symbol {exc}") from exc
    vec = np.asarray(cost, dtype=np.float64)
    if arr.size and (arr.min() < 0 or arr.max() >= vec.size):
        raise ValueError("symbol outside the cost table")
    return float(vec[arr.astype(np.int64, copy=False)].sum())


def state_dist_from_dict(d: Mapping) -> StateDistribution:
    """Build a state distribution from its JSON form.

    Accepted forms: {"support": [[k, p], ...]}, {"deletion": {"d": 0.1}},
    {"constant": {"value": 2}}.
    """
    if "support" in d:
        return StateDistribution(tuple((int(k), float(p)) for k, p in d["support"]))
    if "deletion" in d:
        return StateDistribution.deletion(float(d["deletion"]["d"]))
    if "constant" in d:
        return StateDistribution.constant(int(d["constant"]["value"]))
    raise InvalidConfigError(
        "state distribution spec needs one of: support, deletion, constant")


def state_dist_to_dict(dist: StateDistribution) -> dict:
    return {"support": [[k, p] for k, p in dist.support]}


def back_end_from_dict(d: Mapping) -> BackEnd:
    """Build the memoryless back end from {"dmc": {...}} or {"gaussian": {...}}."""
    if "dmc" in d:
        return Dmc.from_dict(d["dmc"])
    if "gaussian" in d:
        spec = d["gaussian"]
        if "eta2" not in spec:
            raise InvalidConfigError("gaussian spec needs eta2")
        return GaussianNoise(float(spec["eta2"]))
    raise InvalidConfigError("channel spec needs one of: dmc, gaussian")
