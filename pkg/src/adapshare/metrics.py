"""Evaluation metrics: fractional surplus/deficit, Jain fairness, objectives.

Surplus/deficit is the signed mean of (allocated - demanded) / demanded per
network, so 0 means perfect tracking, +0.5 means half again too much, and -1
means nothing allocated. Fairness is Jain's index averaged over steps.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .domain import AgentKind
from .env import objective_j


class LengthMismatch(ValueError):
    """Allocation and demand sequences differ in length."""


class EmptyInput(ValueError):
    """A metric was asked to aggregate zero steps."""


@dataclass(frozen=True)
class EvalReport:
    """Aggregate metrics for one evaluated policy on one scenario.

    per_step rows are (t, allocation, demand, j). zero_alloc_steps counts
    the (0, 0) allocations whose fairness term used the both-starved
    convention (counted as 1).
    """

    s_a: float
    s_b: float
    fairness: float
    mean_j: float
    zero_alloc_steps: int = 0
    per_step: list = field(default_factory=list)


def _alloc_arrays(allocs):
    if len(allocs) == 0:
        raise EmptyInput("no allocations to aggregate")
    n_a = np.array([a.n_a for a in allocs], dtype=float)
    n_b = np.array([a.n_b for a in allocs], dtype=float)
    return n_a, n_b


def _demand_arrays(demands, length):
    if len(demands) != length:
        raise LengthMismatch(f"{length} allocations vs {len(demands)} demands")
    d_a = np.array([d[0] for d in demands], dtype=float)
    d_b = np.array([d[1] for d in demands], dtype=float)
    return d_a, d_b


def surplus_deficit(allocs, demands, d_min=0.1):
    """Mean fractional surplus (+) or deficit (-) per network.

    s_a = (1/T) sum (n_a - d_a) / d_a, demands clamped by d_min before
    division; symmetrically s_b.
    """
    n_a, n_b = _alloc_arrays(allocs)
    d_a, d_b = _demand_arrays(demands, len(allocs))
    d_a = np.maximum(d_a, d_min)
    d_b = np.maximum(d_b, d_min)
    return float(np.mean((n_a - d_a) / d_a)), float(np.mean((n_b - d_b) / d_b))


def jain_fairness(allocs):
    """Mean per-step Jain index (n_a + n_b)^2 / (2 (n_a^2 + n_b^2)).

    A (0, 0) step is 0/0; both sides are equally starved there, so it
    counts as 1 and a warning reports how many steps did.
    """
    n_a, n_b = _alloc_arrays(allocs)
    denom = 2.0 * (n_a ** 2 + n_b ** 2)
    zero = denom == 0.0
    per_step = np.ones_like(denom)
    np.divide((n_a + n_b) ** 2, denom, out=per_step, where=~zero)
    if zero.any():
        warnings.warn(
            f"{int(zero.sum())} all-zero allocation step(s) counted as fairness 1",
            stacklevel=2,
        )
    return float(np.mean(per_step))


def count_zero_alloc_steps(allocs):
    n_a, n_b = _alloc_arrays(allocs)
    return int(np.sum((n_a == 0.0) & (n_b == 0.0)))


def mean_objective(allocs, demands, zeta, d_min=0.1):
    """Mean weighted squared deviation over the steps."""
    if len(allocs) == 0:
        raise EmptyInput("no allocations to aggregate")
    if len(demands) != len(allocs):
        raise LengthMismatch(f"{len(allocs)} allocations vs {len(demands)} demands")
    total = 0.0
    for alloc, demand in zip(allocs, demands):
        total += objective_j(alloc, demand, zeta, d_min)
    return total / len(allocs)


def moving_average(values, window):
    """Trailing mean with an expanding head: out[i] = mean(values[max(0, i-window+1) .. i])."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise EmptyInput("no values to average")
    out = np.empty_like(values)
    for i in range(values.size):
        out[i] = values[max(0, i - window + 1): i + 1].mean()
    return out


def build_report(allocs, demands, zeta, d_min=0.1, timestamps=None, keep_per_step=False):
    """Bundle every metric for one policy run into an EvalReport."""
    s_a, s_b = surplus_deficit(allocs, demands, d_min)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fairness = jain_fairness(allocs)
    zero_steps = count_zero_alloc_steps(allocs)
    mean_j = mean_objective(allocs, demands, zeta, d_min)
    per_step = []
    if keep_per_step:
        if timestamps is None:
            timestamps = range(len(allocs))
        for t, alloc, demand in zip(timestamps, allocs, demands):
            per_step.append((t, alloc, demand, objective_j(alloc, demand, zeta, d_min)))
    return EvalReport(
        s_a=s_a,
        s_b=s_b,
        fairness=fairness,
        mean_j=mean_j,
        zero_alloc_steps=zero_steps,
        per_step=per_step,
    )


SWEEP_HEADER = "zeta,n_r,agent,s_a,s_b,fairness,mean_j"
DETAIL_HEADER = "t,n_a,n_b,d_a,d_b,j"


def sweep_row(zeta, n_r, agent, report):
    """One sweep CSV line; floats via repr so files round-trip exactly."""
    label = agent.value if isinstance(agent, AgentKind) else str(agent)
    return ",".join(
        [
            repr(float(zeta)),
            repr(float(n_r)),
            label,
            repr(report.s_a),
            repr(report.s_b),
            repr(report.fairness),
            repr(report.mean_j),
        ]
    )


def write_detail_csv(report, path):
    """Per-step detail rows for one report (requires keep_per_step)."""
    lines = [DETAIL_HEADER]
    for t, alloc, demand, j in report.per_step:
        lines.append(
            ",".join(
                [
                    repr(float(t)),
                    repr(float(alloc.n_a)),
                    repr(float(alloc.n_b)),
                    repr(float(demand[0])),
                    repr(float(demand[1])),
                    repr(float(j)),
                ]
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
