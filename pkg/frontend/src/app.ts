// DOM wiring: render the controller's view state, forward user actions.
// No trial math happens here.

import { ApiClient } from "./api.js";
import { evidenceChart, weightChart } from "./charts.js";
import { SessionController } from "./controller.js";
import type { TrialConfigForm } from "./types.js";

const api = new ApiClient(
  (window as unknown as { DLMTRIAL_API?: string }).DLMTRIAL_API ?? "http://127.0.0.1:8710",
);
const controller = new SessionController(api);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function readForm(): TrialConfigForm {
  const num = (id: string) => Number(el<HTMLInputElement>(id).value);
  return {
    budget: num("f-budget"),
    rule: el<HTMLSelectElement>("f-rule").value as "zr" | "bb",
    omega: num("f-omega"),
    cTa: num("f-cta"),
    cTb: num("f-ctb"),
    v: num("f-v"),
    seed: num("f-seed"),
  };
}

function render(): void {
  const s = controller.state;
  el("status").textContent = s.trialId
    ? `trial ${s.trialId} | phase ${s.phase} | patient ${s.t}/${s.budget} | A ${s.nA} / B ${s.nB} | rev ${s.revision}`
    : "no trial yet";

  el("form-errors").textContent = s.formErrors.join("; ");
  el("error").textContent = s.error ?? "";
  el("conflict").hidden = !s.conflict;

  const banner = el("stop-banner");
  banner.hidden = !s.stopBanner;
  if (s.stopBanner && s.bf01 !== null) {
    el("stop-detail").textContent =
      `decisive evidence: ratio ${s.bf01.toExponential(3)} at or below ` +
      `${s.bfThreshold}; enrollment disabled until you override`;
  }

  const pendingCard = el("pending");
  if (s.pending) {
    pendingCard.hidden = false;
    el("pending-arm").textContent = s.pending.arm;
    el("pending-detail").textContent =
      `patient ${s.pending.patientIndex}, assigned with P(A) = ${s.pending.wA.toFixed(3)}`;
  } else {
    pendingCard.hidden = true;
  }

  const enrollButton = el<HTMLButtonElement>("enroll");
  enrollButton.disabled =
    s.busy ||
    !s.trialId ||
    s.phase === "awaiting_outcome" ||
    s.phase === "exhausted" ||
    (s.stopBanner && !s.overrideArmed);
  el<HTMLButtonElement>("override").hidden = !s.stopBanner;
  el<HTMLButtonElement>("submit-outcome").disabled = s.busy || s.phase !== "awaiting_outcome";
  el<HTMLButtonElement>("create").disabled = s.busy;
  el<HTMLButtonElement>("export").disabled = s.busy || !s.trialId;

  el("weight-chart").innerHTML = weightChart(s.weightSeries, Math.max(s.budget, 1));
  el("bf-chart").innerHTML = evidenceChart(s.bfSeries, Math.max(s.budget, 1), s.bfThreshold);
  el("recommendation").textContent = s.recommendation;
}

controller.onChange(render);

el("create").addEventListener("click", () => void controller.setup(readForm()));
el("enroll").addEventListener("click", () => void controller.enroll());
el("override").addEventListener("click", () => controller.armOverride());
el("submit-outcome").addEventListener("click", () => {
  void controller
    .submitOutcome(el<HTMLInputElement>("outcome").value)
    .then(() => {
      if (!controller.state.error) el<HTMLInputElement>("outcome").value = "";
    });
});
el("refresh").addEventListener("click", () => void controller.refresh());
el("export").addEventListener("click", () => {
  void controller.exportLog().then((text) => {
    const blob = new Blob([text], { type: "text/plain;charset=utf-8" });
    const url = URL.createObjectURL(blob);
    const a = document.createElement("a");
    a.href = url;
    a.download = `${controller.state.trialId}.log`;
    a.click();
    URL.revokeObjectURL(url);
  });
});

render();
