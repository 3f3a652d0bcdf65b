# Filtering basics: track a baseline level and a treatment offset through
# sequential observations, watching the belief tighten.

import numpy as np

from dlmtrial import DlmState, evolve, forecast_arm, standard_spec, update

rng = np.random.default_rng(1)

# true world: baseline 10, treatment adds 2, observation noise sd 1
true_theta = np.array([10.0, 2.0])
spec = standard_spec(omega=0.01, v=1.0)

state = DlmState(m=np.zeros(2), C=np.diag([25.0, 25.0]), t=0)
print(f"{'t':>3} {'arm':>3} {'y':>7} {'baseline':>9} {'offset':>7} {'sd(offset)':>10}")
for t in range(1, 31):
    prior = evolve(state, spec)
    design = spec.design_a if t % 2 else spec.design_b
    fc = forecast_arm(prior, design, spec.V)
    y = rng.normal(design @ true_theta, 1.0)
    state = update(prior, design, fc, y)
    if t <= 6 or t % 10 == 0:
        sd = np.sqrt(state.C[1, 1])
        print(f"{t:>3} {'A' if t % 2 else 'B':>3} {y:7.2f} {state.m[0]:9.3f} {state.m[1]:7.3f} {sd:10.3f}")

print(f"\ntrue baseline {true_theta[0]}, true offset {true_theta[1]}")
print(f"final belief  {state.m[0]:.3f} and {state.m[1]:.3f} after {state.t} patients")
