# A coordinator-driven trial: the engine assigns each patient, a human
# (simulated here) reports the observed outcome, and the session
# recommends stopping once the evidence turns decisive.  The event log
# then replays to the identical final state.

import numpy as np

from dlmtrial import LiveSession, Recommendation, make_trial_config
from dlmtrial import eventlog

config = make_trial_config(
    budget=60, rule="bb", omega=0.1, c_ta=1.0, c_tb=0.000001, v=1.0,
    seed=7, enforce_stop=True,
)
session = LiveSession.create(config)

# stand-in for the clinic: arm A responds around 1, arm B around 6
clinic = np.random.default_rng(99)
observed = {"A": lambda: clinic.normal(1.0, 1.0), "B": lambda: clinic.normal(6.0, 1.0)}

while True:
    ticket = session.enroll()
    y = observed[ticket.arm.value]()
    summary = session.record_outcome(y)
    bf = "---" if summary.bf is None else f"{summary.bf.bf01:9.4f}"
    print(
        f"patient {summary.t:>2}: arm {ticket.arm.value} (w_A={ticket.w_a:.3f}) "
        f"outcome {y:6.2f}  evidence {bf}  -> {summary.recommendation.value}"
    )
    if summary.recommendation is not Recommendation.CONTINUE:
        break

print(f"\ntrial ended after {summary.t} patients: {summary.recommendation.value}")
print(f"posterior means: {np.round(summary.posterior_mean, 3)}")

log_text = eventlog.dumps(session.config, session.records)
parsed_config, records = eventlog.loads(log_text)
report = eventlog.replay(parsed_config, records)
print(f"\nevent log: {len(records)} records, replay ok = {report.ok}")
print(f"replayed final means match: {list(report.final_state_m) == list(summary.posterior_mean)}")
