# One adaptive trial from start to stop: weights drift toward the better
# arm while the evidence ratio falls toward the decisive 1/100 line.

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from dlmtrial import make_trial_config, run_trial

config = make_trial_config(
    budget=100,
    rule="bb",
    omega=0.1,
    c_ta=0.000001,
    c_tb=0.000001,
    v=1.0,
    mu_a=0.0,      # arm A truly better (lower response)
    mu_b=2.0,
    sigma=1.0,
    seed=2024,
    enforce_stop=True,
    independent_arms=True,
    weight_scale="sd",
    evolution="per_arm",
)
result = run_trial(config)

print(f"enrolled {len(result.records)} of {config.budget} budgeted patients")
print(f"arm counts: A={result.n_a}, B={result.n_b}")
print(f"weight switch index: {result.switch_index}, count switch: {result.allocation_switch_index}")
print(f"stopped: {result.stopped} at patient {result.n_stop}")
if result.final_bf is not None:
    print(f"final evidence ratio {result.final_bf.bf01:.2e} (decisive at <= 0.01)")
print("\nfirst eight patients:")
for rec in result.records[:8]:
    bf = "---" if rec.bf01 is None else f"{rec.bf01:8.3f}"
    print(f"  t={rec.t:>2} arm={rec.arm.value} y={rec.y:7.2f} w_A={rec.w_a:.3f} bf01={bf}")

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)
fig, (top, bottom) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
ts = [r.t for r in result.records]
top.plot(ts, [r.w_a for r in result.records])
top.axhline(0.5, color="grey", lw=0.5)
top.set_ylabel("P(assign A)")
bf_ts = [r.t for r in result.records if r.bf01 is not None]
bottom.semilogy(bf_ts, [r.bf01 for r in result.records if r.bf01 is not None])
bottom.axhline(0.01, color="red", lw=0.8, label="decisive threshold")
bottom.set_xlabel("patient")
bottom.set_ylabel("evidence ratio")
bottom.legend()
fig.tight_layout()
fig.savefig(out / "single_trial.png", dpi=120)
print(f"\nplot -> {out / 'single_trial.png'}")
