# A slice of the sensitivity grid: how the treatment-arm mean (mu_b) and
# the evolution variance (omega) shape allocation proportions, switch
# counts, and the stopping distribution.  First CLI arg overrides the
# per-cell simulation count.

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from dlmtrial import SweepGrid, run_sweep, stopping_table

n_sims = int(sys.argv[1]) if len(sys.argv) > 1 else 200

grid = SweepGrid(
    mu_b_values=(1.0, 3.0, 5.0),
    omega_values=(0.1, 0.001),
    c_tb_values=(0.000001,),
    n_sims=n_sims,
)
summaries = run_sweep(grid, seed=42, jobs=2)

print(f"{n_sims} trials per cell, budget {grid.budget}\n")
print(f"{'mu_b':>4} {'omega':>6} | {'prop A':>7} {'switch':>7} {'stop q50':>8} {'P(N>=100)':>9}")
for s in summaries:
    print(
        f"{s.mu_b:4.0f} {s.omega:6.3f} | {s.mean_prop_a:7.3f} {s.mean_switch:7.2f} "
        f"{s.stop_quantiles[1]:8.1f} {s.p_exhaust:9.3f}"
    )

print("\nstopping table rows:")
for row in stopping_table(summaries):
    print(
        f"  mu_b={row.mu_b:g} omega={row.omega:g}: quantiles "
        f"({row.stop_q025:g}, {row.stop_q50:g}, {row.stop_q975:g}), "
        f"P(N>=budget)={row.p_exhaust:.3f}"
    )

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)
plt.figure(figsize=(7, 4))
for s in summaries:
    t = np.arange(1, grid.budget + 1)
    line, = plt.plot(t, s.band_mean, label=f"mu_b={s.mu_b:g}, omega={s.omega:g}")
    plt.fill_between(t, s.band_lo, s.band_hi, alpha=0.12, color=line.get_color())
plt.axhline(0.5, color="grey", lw=0.5)
plt.xlabel("patient")
plt.ylabel("mean P(assign A) with 95% band")
plt.legend(fontsize=8)
plt.tight_layout()
plt.savefig(out / "sweep_bands.png", dpi=120)
print(f"\nband plot -> {out / 'sweep_bands.png'}")
