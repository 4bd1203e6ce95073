"""Core value types shared across the package: demand series, allocations,
and run configuration.

All types here are immutable after construction and safe to share between
parallel workers. Demands and allocations are continuous nonnegative reals
measured in PRB; integer rounding is a display concern, never done in the
math.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Iterator, Sequence

import numpy as np

if TYPE_CHECKING:  # avoids a domain <-> agents import cycle
    from .agents import AgentConfig


class AgentKind(str, Enum):
    """Allocation policy families understood by the harness."""

    DDPG = "ddpg"
    TD3 = "td3"
    OPT_ORACLE = "opt_oracle"
    OPT_BASE = "opt_base"


@dataclass(frozen=True)
class DemandSample:
    """One time step of paired PRB demand (LTE side A, NR side B)."""

    timestamp: int
    d_a: float
    d_b: float

    def __post_init__(self):
        if self.d_a < 0 or self.d_b < 0:
            raise ValueError(f"demand must be nonnegative, got ({self.d_a}, {self.d_b})")


class DemandSeries:
    """Uniformly spaced time series of per-network PRB demand.

    Stored as parallel numpy arrays; consecutive timestamps must differ by
    exactly `granularity` seconds.
    """

    def __init__(self, timestamps, d_a, d_b, granularity: int):
        ts = np.asarray(timestamps, dtype=np.int64)
        da = np.asarray(d_a, dtype=np.float64)
        db = np.asarray(d_b, dtype=np.float64)
        if not (len(ts) == len(da) == len(db)):
            raise ValueError("timestamps, d_a, d_b must have equal length")
        if len(ts) < 1:
            raise ValueError("a demand series needs at least one sample")
        if granularity <= 0 or int(granularity) != granularity:
            raise ValueError(f"granularity must be a positive integer, got {granularity}")
        if len(ts) > 1:
            gaps = np.diff(ts)
            if not np.all(gaps == granularity):
                bad = int(np.argmax(gaps != granularity))
                raise ValueError(
                    f"non-uniform spacing at index {bad + 1}: gap {gaps[bad]} != {granularity}"
                )
        if np.any(da < 0) or np.any(db < 0):
            raise ValueError("demands must be nonnegative")
        self.timestamps = ts
        self.d_a = da
        self.d_b = db
        self.granularity = int(granularity)
        for arr in (self.timestamps, self.d_a, self.d_b):
            arr.setflags(write=False)

    @classmethod
    def from_samples(cls, samples: Sequence[DemandSample], granularity: int) -> "DemandSeries":
        return cls(
            [s.timestamp for s in samples],
            [s.d_a for s in samples],
            [s.d_b for s in samples],
            granularity,
        )

    def __len__(self) -> int:
        return len(self.timestamps)

    def __iter__(self) -> Iterator[DemandSample]:
        for i in range(len(self)):
            yield self.sample(i)

    def sample(self, i: int) -> DemandSample:
        return DemandSample(int(self.timestamps[i]), float(self.d_a[i]), float(self.d_b[i]))

    def demand(self, i: int) -> tuple[float, float]:
        """The (d_a, d_b) pair at step i."""
        return float(self.d_a[i]), float(self.d_b[i])

    def populated_side(self) -> str | None:
        """"a" or "b" if only that column carries demand, else None."""
        a_used = bool(np.any(self.d_a != 0))
        b_used = bool(np.any(self.d_b != 0))
        if a_used and b_used:
            return None
        if b_used:
            return "b"
        return "a"

    def column(self, side: str) -> np.ndarray:
        if side not in ("a", "b"):
            raise ValueError(f"side must be 'a' or 'b', got {side!r}")
        return self.d_a if side == "a" else self.d_b


def clamp_demand(d: float, d_min: float) -> float:
    """Floor a demand at d_min so fractional-error denominators stay positive."""
    return d if d > d_min else d_min


@dataclass(frozen=True)
class Allocation:
    """A PRB grant pair. Pool feasibility (n_a + n_b <= n_r) is enforced by
    the constructors that know the pool size: action projection and the
    exact solvers."""

    n_a: float
    n_b: float

    def __post_init__(self):
        if self.n_a < 0 or self.n_b < 0:
            raise ValueError(f"grants must be nonnegative, got ({self.n_a}, {self.n_b})")


@dataclass(frozen=True)
class EnvConfig:
    """Environment parameters.

    zeta weighs network A's squared fractional error against B's; eta scales
    the penalty on the objective (reward = -(1 + eta) * J, so eta rescales
    but never reorders actions); window_n is the number of past demand pairs
    observed in addition to the current one; capacity_norm divides raw
    demands into observation features.
    """

    n_r: float
    zeta: float = 0.5
    eta: float = 0.0
    window_n: int = 4
    d_min: float = 0.1
    capacity_norm: float = 100.0

    def __post_init__(self):
        if not 0.0 <= self.zeta <= 1.0:
            raise ValueError(f"zeta must lie in [0, 1], got {self.zeta}")
        if self.n_r <= 0:
            raise ValueError(f"n_r must be positive, got {self.n_r}")
        if self.eta < 0:
            raise ValueError(f"eta must be nonnegative, got {self.eta}")
        if self.window_n < 0 or int(self.window_n) != self.window_n:
            raise ValueError(f"window_n must be a nonnegative integer, got {self.window_n}")
        if self.d_min <= 0:
            raise ValueError(f"d_min must be positive, got {self.d_min}")
        if self.capacity_norm < self.n_r:
            raise ValueError(
                f"capacity_norm ({self.capacity_norm}) must cover the pool size ({self.n_r})"
            )


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one training/evaluation run depends on."""

    env: EnvConfig
    agent_kind: AgentKind = AgentKind.TD3
    agent: "AgentConfig | None" = None
    seed: int = 42
    train_steps: int = 20000
    eval_split: float = 0.25

    def __post_init__(self):
        if not 0.0 < self.eval_split < 1.0:
            raise ValueError(f"eval_split must lie in (0, 1), got {self.eval_split}")
        if self.train_steps < 0:
            raise ValueError(f"train_steps must be nonnegative, got {self.train_steps}")
        if self.agent is None:
            from .agents import AgentConfig

            object.__setattr__(self, "agent", AgentConfig())

    def with_env(self, **changes) -> "ExperimentConfig":
        return replace(self, env=replace(self.env, **changes))


SERIES_HEADER = "timestamp,d_a,d_b"


def write_series_csv(series: DemandSeries, path) -> None:
    """Write the canonical demand CSV: header timestamp,d_a,d_b, LF endings."""
    lines = [SERIES_HEADER]
    for i in range(len(series)):
        lines.append(f"{int(series.timestamps[i])},{float(series.d_a[i])!r},{float(series.d_b[i])!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_series_csv(path, granularity: int | None = None) -> DemandSeries:
    """Read the canonical demand CSV. Granularity is inferred from the first
    timestamp gap unless given; single-sample files need it explicitly."""
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"demand series file not found: {p}")
    lines = p.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != SERIES_HEADER:
        raise ValueError(f"{p}: expected header {SERIES_HEADER!r}, got {lines[0]!r}" if lines else f"{p}: empty file")
    ts, da, db = [], [], []
    for k, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 3:
            raise ValueError(f"{p}:{k}: expected 3 fields, got {len(cells)}")
        ts.append(int(cells[0]))
        da.append(float(cells[1]))
        db.append(float(cells[2]))
    if granularity is None:
        if len(ts) < 2:
            raise ValueError(f"{p}: cannot infer granularity from fewer than 2 rows")
        granularity = int(ts[1] - ts[0])
    return DemandSeries(ts, da, db, granularity)
