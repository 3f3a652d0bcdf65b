// Session controller: the console's entire behavior without any DOM.
// State is a pure projection of server responses -- the browser never
// recomputes weights or evidence ratios.  The DOM layer renders this
// state and forwards user actions.

import { ApiClient, RevisionConflict } from "./api.js";
import {
  buildTrialConfig,
  validateForm,
  type StateResponse,
  type TrialConfigForm,
} from "./types.js";

export interface PendingCard {
  patientIndex: number;
  arm: "A" | "B";
  wA: number;
}

export interface ViewState {
  trialId: string | null;
  revision: number;
  phase: string;
  t: number;
  nA: number;
  nB: number;
  budget: number;
  bfThreshold: number;
  weightSeries: { t: number; wA: number }[];
  bfSeries: { t: number; bf01: number }[];
  pending: PendingCard | null;
  recommendation: string;
  bf01: number | null;
  switchIndex: number | null;
  stopBanner: boolean;
  overrideArmed: boolean;
  busy: boolean;
  formErrors: string[];
  error: string | null;
  conflict: boolean;
}

function initialState(): ViewState {
  return {
    trialId: null,
    revision: 0,
    phase: "unconfigured",
    t: 0,
    nA: 0,
    nB: 0,
    budget: 0,
    bfThreshold: 0.01,
    weightSeries: [],
    bfSeries: [],
    pending: null,
    recommendation: "continue",
    bf01: null,
    switchIndex: null,
    stopBanner: false,
    overrideArmed: false,
    busy: false,
    formErrors: [],
    error: null,
    conflict: false,
  };
}

export class SessionController {
  state: ViewState = initialState();
  private listeners: (() => void)[] = [];

  constructor(private api: ApiClient) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  private applyServerState(server: StateResponse): void {
    const s = this.state;
    s.revision = server.revision;
    s.phase = server.phase;
    s.t = server.t;
    s.nA = server.n_a;
    s.nB = server.n_b;
    s.budget = server.budget;
    s.bfThreshold = server.bf_threshold;
    s.weightSeries = server.weight_trajectory.map((p) => ({ t: p.t, wA: p.w_a }));
    s.bfSeries = server.bf_trajectory
      .filter((p): p is { t: number; bf01: number } => p.bf01 !== null)
      .map((p) => ({ t: p.t, bf01: p.bf01 }));
    s.recommendation = server.recommendation;
    s.bf01 = server.bf01;
    s.switchIndex = server.switch_index;
    s.stopBanner = server.recommendation === "stop_decisive";
    if (!s.stopBanner) s.overrideArmed = false;
    s.pending = server.pending
      ? {
          patientIndex: server.pending.patient_index,
          arm: server.pending.arm,
          wA: server.pending.w_a,
        }
      : null;
    s.conflict = false;
  }

  private async guarded(action: () => Promise<void>): Promise<void> {
    if (this.state.busy) return;
    this.state.busy = true;
    this.state.error = null;
    this.emit();
    try {
      await action();
    } catch (err) {
      if (err instanceof RevisionConflict) {
        // another view advanced the trial: refetch, never merge silently
        this.state.conflict = true;
        if (this.state.trialId) {
          this.applyServerState(await this.api.state(this.state.trialId));
          this.state.conflict = true;
        }
      } else {
        // keep entered values; surface a retry affordance
        this.state.error = err instanceof Error ? err.message : String(err);
      }
    } finally {
      this.state.busy = false;
      this.emit();
    }
  }

  async setup(form: TrialConfigForm): Promise<void> {
    const problems = validateForm(form);
    this.state.formErrors = problems;
    if (problems.length > 0) {
      this.emit();
      return;
    }
    await this.guarded(async () => {
      const created = await this.api.createTrial(buildTrialConfig(form));
      this.state = initialState();
      this.state.trialId = created.trial_id;
      this.applyServerState(await this.api.state(created.trial_id));
    });
  }

  async enroll(): Promise<void> {
    const { trialId, revision, stopBanner, overrideArmed } = this.state;
    if (!trialId) return;
    if (stopBanner && !overrideArmed) {
      this.state.error = "stop recommended: arm the override to enroll anyway";
      this.emit();
      return;
    }
    await this.guarded(async () => {
      await this.api.enroll(trialId, revision, stopBanner && overrideArmed);
      this.state.overrideArmed = false;
      this.applyServerState(await this.api.state(trialId));
    });
  }

  async submitOutcome(text: string): Promise<void> {
    const { trialId, revision } = this.state;
    if (!trialId) return;
    const y = Number(text);
    if (text.trim() === "" || !Number.isFinite(y)) {
      this.state.error = "outcome must be a finite number";
      this.emit();
      return;
    }
    await this.guarded(async () => {
      await this.api.recordOutcome(trialId, revision, y);
      this.applyServerState(await this.api.state(trialId));
    });
  }

  armOverride(): void {
    if (this.state.stopBanner) {
      this.state.overrideArmed = true;
      this.state.error = null;
      this.emit();
    }
  }

  async refresh(): Promise<void> {
    const { trialId } = this.state;
    if (!trialId) return;
    await this.guarded(async () => {
      this.applyServerState(await this.api.state(trialId));
    });
  }

  async exportLog(): Promise<string> {
    if (!this.state.trialId) throw new Error("no trial");
    return this.api.exportLog(this.state.trialId);
  }
}
