import type {
  FacilityConfig,
  ForecastBundle,
  HistoryPayload,
  JobRecord,
  OffsetInstance,
  OffsetPlan,
  WhatifRequest,
  WhatifResponse,
} from "./types.js";
import { ApiRequestError } from "./errors.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function asJson<T>(resp: Response): Promise<T> {
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiRequestError(
      resp.status,
      body.error ?? "HTTPError",
      body.detail ?? resp.statusText,
      body.violations ?? [],
    );
  }
  return body as T;
}

/** Thin typed client over the service JSON API. */
export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetcher: FetchLike = (url, init) => fetch(url, init),
  ) {}

  facilities(): Promise<FacilityConfig[]> {
    return this.get<FacilityConfig[]>("/facilities");
  }

  forecast(facility: string, month: string): Promise<ForecastBundle> {
    return this.get<ForecastBundle>(
      `/facilities/${encodeURIComponent(facility)}/forecast?month=${month}`,
    );
  }

  history(facility: string, month: string): Promise<HistoryPayload> {
    return this.get<HistoryPayload>(
      `/facilities/${encodeURIComponent(facility)}/history?month=${month}`,
    );
  }

  whatif(facility: string, body: WhatifRequest): Promise<WhatifResponse> {
    return this.post<WhatifResponse>(
      `/facilities/${encodeURIComponent(facility)}/whatif`,
      body,
    );
  }

  offsetRecommend(
    facility: string,
    instance: OffsetInstance,
  ): Promise<OffsetPlan> {
    return this.post<OffsetPlan>(
      `/facilities/${encodeURIComponent(facility)}/offset/recommend`,
      instance,
    );
  }

  retrain(facility: string, month: string): Promise<JobRecord> {
    return this.post<JobRecord>(
      `/facilities/${encodeURIComponent(facility)}/retrain?month=${month}`,
      null,
    );
  }

  job(jobId: string): Promise<JobRecord> {
    return this.get<JobRecord>(`/jobs/${encodeURIComponent(jobId)}`);
  }

  private get<T>(path: string): Promise<T> {
    return this.fetcher(this.base + path).then((r) => asJson<T>(r));
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.fetcher(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: body === null ? undefined : JSON.stringify(body),
    }).then((r) => asJson<T>(r));
  }
}

/**
 * Serializes concurrent requests from one call site: each start() bumps a
 * sequence number and any response arriving for an older sequence is
 * discarded, so a slow earlier response can never overwrite a newer one.
 */
export class LatestRequestGate {
  private seq = 0;

  start(): number {
    this.seq += 1;
    return this.seq;
  }

  isCurrent(token: number): boolean {
    return token === this.seq;
  }

  /** Runs work() and invokes apply() only if no newer request started. */
  async run<T>(work: () => Promise<T>, apply: (value: T) => void): Promise<boolean> {
    const token = this.start();
    const value = await work();
    if (!this.isCurrent(token)) {
      return false;
    }
    apply(value);
    return true;
  }
}
