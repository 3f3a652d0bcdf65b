// Thin typed client for the live-trial service.  Every mutation carries
// the If-Match revision; 409 surfaces as RevisionConflict so the caller
// can refetch instead of silently merging.

import type {
  CreateResponse,
  EnrollResponse,
  OutcomeResponse,
  StateResponse,
  TrialConfigBody,
} from "./types.js";

export class RevisionConflict extends Error {}
export class RequestRejected extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    revision?: number,
  ): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (revision !== undefined) headers["If-Match"] = String(revision);
    const resp = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (resp.status === 409) {
      throw new RevisionConflict(await resp.text());
    }
    if (!resp.ok) {
      throw new RequestRejected(resp.status, await resp.text());
    }
    return (await resp.json()) as T;
  }

  createTrial(config: TrialConfigBody): Promise<CreateResponse> {
    return this.request<CreateResponse>("POST", "/trials", config);
  }

  enroll(trialId: string, revision: number, overrideStop = false): Promise<EnrollResponse> {
    return this.request<EnrollResponse>(
      "POST",
      `/trials/${trialId}/enroll`,
      { override_stop: overrideStop },
      revision,
    );
  }

  recordOutcome(trialId: string, revision: number, y: number): Promise<OutcomeResponse> {
    return this.request<OutcomeResponse>(
      "POST",
      `/trials/${trialId}/outcome`,
      { y },
      revision,
    );
  }

  state(trialId: string): Promise<StateResponse> {
    return this.request<StateResponse>("GET", `/trials/${trialId}/state`);
  }

  async exportLog(trialId: string): Promise<string> {
    const resp = await this.fetchFn(`${this.baseUrl}/trials/${trialId}/export`);
    if (!resp.ok) throw new RequestRejected(resp.status, await resp.text());
    return await resp.text();
  }
}
