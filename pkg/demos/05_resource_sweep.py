"""
A small reproducible sweep with CSV tables and SVG charts
=========================================================

Runs a reduced (pool size x priority weight x agent) grid and emits
the full result bundle: sweep.csv, per-cell detail CSVs, a learning
curve per trained cell, and hand-built SVG charts. Every file except
the metadata sidecar is byte-identical across reruns.
"""

from pathlib import Path

from adapshare import AgentKind, EnvConfig, ExperimentConfig, read_series_csv
from adapshare.agents import AgentConfig
from adapshare.domain import DemandSeries
from adapshare.harness.results import emit_results
from adapshare.harness.sweep import SweepSpec, run_sweep
from adapshare.synthgen import fit, generate

repo = Path(__file__).resolve().parents[1]
out_dir = repo / "demos" / "out" / "sweep"

ref = read_series_csv(repo / "fixtures" / "lte_hourly.csv")
stats = fit(ref, side="a")
gen_a = generate(stats, length=300, seed=42, side="a")
gen_b = generate(stats, length=300, seed=43, side="b")
series = DemandSeries(gen_a.timestamps, gen_a.d_a, gen_b.d_b, 3600)

# a light agent config keeps the demo quick; the defaults suit real runs
base = ExperimentConfig(
    env=EnvConfig(n_r=20.0),
    seed=7,
    train_steps=1500,
    agent=AgentConfig(hidden_dims=(32,), warmup_steps=200),
)
spec = SweepSpec(
    base=base,
    n_r_values=(20.0, 60.0),
    zeta_values=(0.2, 0.5, 0.8),
    agent_kinds=(AgentKind.TD3, AgentKind.OPT_ORACLE, AgentKind.OPT_BASE),
)

total = len(spec.n_r_values) * len(spec.zeta_values) * len(spec.agent_kinds)
print(f"running {total} cells...")
rows = run_sweep(
    spec,
    series,
    progress=lambda done, n, row: print(
        f"  [{done}/{n}] {row.agent_kind.value} n_r={row.n_r:g} "
        f"zeta={row.zeta:g} mean_j={row.report.mean_j:.4f}"
    ),
)

written = emit_results(rows, out_dir)
print(f"\nwrote {len(written)} files:")
for path in written:
    print(f"  {Path(path).relative_to(repo)}")
