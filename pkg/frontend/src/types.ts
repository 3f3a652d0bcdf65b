// Wire types mirroring the service's JSON bodies.

export interface TrialConfigForm {
  budget: number;
  rule: "zr" | "bb";
  omega: number;
  cTa: number;
  cTb: number;
  v: number;
  seed: number;
  bfThreshold?: number;
  independentArms?: boolean;
  weightScale?: "variance" | "sd";
  evolution?: "joint" | "per_arm";
}

export interface TrialConfigBody {
  budget: number;
  rule: string;
  dlm: {
    design_a: number[];
    design_b: number[];
    g: number[][];
    w: number[][];
    v: number;
  };
  init_m: number[];
  init_c: number[][];
  bf_prior: { effect_mean: number; effect_var: number; prior_odds: number };
  bf_threshold: number;
  seed: number;
  enforce_stop: boolean;
  negate_outcomes: boolean;
  weight_scale: string;
  evolution: string;
}

export interface CreateResponse {
  trial_id: string;
  revision: number;
}

export interface EnrollResponse {
  patient_index: number;
  arm: "A" | "B";
  w_a: number;
  forecasts: { f_a: number; q_a: number; f_b: number; q_b: number };
  revision: number;
}

export interface OutcomeResponse {
  t: number;
  n_a: number;
  n_b: number;
  posterior_mean: number[];
  posterior_cov: number[][];
  bf01: number | null;
  recommendation: "continue" | "stop_decisive" | "budget_exhausted";
  revision: number;
}

export interface StateResponse {
  phase: string;
  t: number;
  n_a: number;
  n_b: number;
  current_w_a: number | null;
  pending: { patient_index: number; arm: "A" | "B"; w_a: number } | null;
  posterior_mean: number[];
  posterior_cov: number[][];
  bf01: number | null;
  bf_trajectory: { t: number; bf01: number | null }[];
  weight_trajectory: { t: number; w_a: number }[];
  switch_index: number | null;
  recommendation: string;
  budget: number;
  bf_threshold: number;
  revision: number;
}

// Client-side validation only checks form sanity; all trial math stays
// on the server.
export function validateForm(form: TrialConfigForm): string[] {
  const problems: string[] = [];
  if (!Number.isInteger(form.budget) || form.budget < 2) {
    problems.push("budget must be an integer >= 2");
  }
  if (!(form.omega > 0)) problems.push("omega must be > 0");
  if (!(form.cTa >= 0)) problems.push("c_ta must be >= 0");
  if (!(form.cTb >= 0)) problems.push("c_tb must be >= 0");
  if (!(form.v > 0)) problems.push("v must be > 0");
  if (!Number.isInteger(form.seed)) problems.push("seed must be an integer");
  return problems;
}

export function buildTrialConfig(form: TrialConfigForm): TrialConfigBody {
  const independent = form.independentArms ?? false;
  return {
    budget: form.budget,
    rule: form.rule,
    dlm: {
      design_a: [1.0, 0.0],
      design_b: independent ? [0.0, 1.0] : [1.0, 1.0],
      g: [
        [1.0, 0.0],
        [0.0, 1.0],
      ],
      w: [
        [form.omega, 0.0],
        [0.0, form.omega],
      ],
      v: form.v,
    },
    init_m: [0.0, 0.0],
    init_c: [
      [form.cTa, 0.0],
      [0.0, form.cTb],
    ],
    bf_prior: { effect_mean: 0.0, effect_var: 2.0, prior_odds: 1.0 },
    bf_threshold: form.bfThreshold ?? 0.01,
    seed: form.seed,
    enforce_stop: true,
    negate_outcomes: false,
    weight_scale: form.weightScale ?? "variance",
    evolution: form.evolution ?? "joint",
  };
}
