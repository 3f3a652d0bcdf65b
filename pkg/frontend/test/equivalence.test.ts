// End-to-end equivalence against the real service: a scripted
// 10-patient session driven through the console's controller must export
// an event log byte-identical to the same inputs posted directly to the
// API, and the stop banner must track the server's recommendation
// exactly.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { SessionController } from "../src/controller.js";
import { buildTrialConfig, type TrialConfigForm } from "../src/types.js";

const PORT = 8733;
const BASE = `http://127.0.0.1:${PORT}`;
let service: ChildProcess;

const FORM: TrialConfigForm = {
  budget: 30,
  rule: "bb",
  omega: 0.1,
  cTa: 1.0,
  cTb: 0.000001,
  v: 1.0,
  seed: 4242,
};

// Outcomes keyed by assigned arm: arm A hovers near zero, arm B is far
// worse, so the evidence turns decisive within the scripted ten patients.
const OUTCOMES: Record<"A" | "B", number[]> = {
  A: [0.1, -0.3, 0.2, 0.05, -0.1, 0.15, 0.0, -0.2, 0.1, 0.05],
  B: [9.8, 10.3, 9.6, 10.1, 9.9, 10.2, 10.0, 9.7, 10.4, 9.95],
};

async function waitForService(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt += 1) {
    try {
      const resp = await fetch(`${BASE}/trials`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  const dataDir = mkdtempSync(join(tmpdir(), "dlmtrial-ui-"));
  service = spawn(
    "python3",
    ["-m", "dlmtrial.cli", "serve", "--addr", `127.0.0.1:${PORT}`, "--data-dir", dataDir],
    { stdio: "ignore" },
  );
  await waitForService();
}, 30_000);

afterAll(() => {
  service?.kill();
});

describe("console vs direct API", () => {
  it("produces a byte-identical event log for the same scripted session", async () => {
    // --- leg 1: through the console's controller ------------------------
    const controller = new SessionController(new ApiClient(BASE));
    await controller.setup(FORM);
    expect(controller.state.trialId).not.toBeNull();

    const counters = { A: 0, B: 0 };
    const bannerByPatient: boolean[] = [];
    for (let patient = 0; patient < 10; patient += 1) {
      if (controller.state.stopBanner) controller.armOverride();
      await controller.enroll();
      expect(controller.state.error).toBeNull();
      const pending = controller.state.pending;
      expect(pending).not.toBeNull();
      const arm = pending!.arm;
      const y = OUTCOMES[arm][counters[arm]];
      counters[arm] += 1;
      await controller.submitOutcome(String(y));
      expect(controller.state.error).toBeNull();
      // banner state is a pure projection of the recommendation
      expect(controller.state.stopBanner).toBe(
        controller.state.recommendation === "stop_decisive",
      );
      bannerByPatient.push(controller.state.stopBanner);
    }
    expect(bannerByPatient.at(-1)).toBe(true); // scripted gap forces a stop
    const uiExport = await controller.exportLog();

    // --- leg 2: the same inputs posted directly -------------------------
    const direct = new ApiClient(BASE);
    const created = await direct.createTrial(buildTrialConfig(FORM));
    let revision = created.revision;
    const directCounters = { A: 0, B: 0 };
    for (let patient = 0; patient < 10; patient += 1) {
      const enrolled = await direct.enroll(created.trial_id, revision, true);
      revision = enrolled.revision;
      const y = OUTCOMES[enrolled.arm][directCounters[enrolled.arm]];
      directCounters[enrolled.arm] += 1;
      const outcome = await direct.recordOutcome(created.trial_id, revision, y);
      revision = outcome.revision;
    }
    const directExport = await direct.exportLog(created.trial_id);

    expect(directCounters).toEqual(counters); // same arms in the same order
    expect(uiExport).toBe(directExport); // byte-identical logs
    expect(uiExport.split("\n").filter((l) => l && !l.startsWith("#")).length).toBe(11); // header row + 10 records
  }, 60_000);

  it("reflects server state after an out-of-band mutation via refresh", async () => {
    const controller = new SessionController(new ApiClient(BASE));
    await controller.setup({ ...FORM, seed: 777 });
    const trialId = controller.state.trialId!;

    // someone else enrolls behind the console's back
    const other = new ApiClient(BASE);
    await other.enroll(trialId, controller.state.revision, false);

    await controller.enroll(); // stale revision -> conflict -> refetch
    expect(controller.state.conflict).toBe(true);
    expect(controller.state.phase).toBe("awaiting_outcome");
  }, 30_000);
});
