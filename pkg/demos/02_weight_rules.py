# The two randomization rules side by side: how the probability of
# assigning arm A responds to the gap between predicted outcomes.
# Lower predicted mean is the favorable direction for both rules.

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from dlmtrial import ArmForecasts, weights_bb, weights_zr

f_b = 10.0
gaps = np.linspace(-8.0, 8.0, 161)

ratio_w, smooth_w = [], []
for gap in gaps:
    fc = ArmForecasts(f_a=f_b + gap, f_b=f_b, q_a=1.0, q_b=1.0)
    ratio_w.append(weights_zr(fc).w_a)
    smooth_w.append(weights_bb(fc).w_a)

print("gap f_A - f_B   ratio-rule w_A   smooth-rule w_A")
for g in (-5.0, -1.0, 0.0, 1.0, 5.0):
    i = int(np.argmin(np.abs(gaps - g)))
    print(f"{gaps[i]:13.1f} {ratio_w[i]:16.3f} {smooth_w[i]:17.3f}")

# the ratio rule needs positive forecasts; watch the guard engage
guarded = weights_zr(ArmForecasts(f_a=-1.0, f_b=4.0, q_a=1.0, q_b=1.0))
print(f"\nnegative forecast -> ratio rule returns {guarded.w_a} ({guarded.branch})")

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)
plt.figure(figsize=(7, 4))
plt.plot(gaps, ratio_w, label="ratio rule")
plt.plot(gaps, smooth_w, label="smooth rule")
plt.axhline(0.5, color="grey", lw=0.5)
plt.xlabel("predicted gap f_A - f_B")
plt.ylabel("P(assign A)")
plt.legend()
plt.tight_layout()
plt.savefig(out / "weight_rules.png", dpi=120)
print(f"plot -> {out / 'weight_rules.png'}")
