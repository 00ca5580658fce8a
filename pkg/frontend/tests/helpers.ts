import { ApiClient, type FetchLike } from "../src/api.js";

export interface RecordedCall {
  url: string;
  init?: RequestInit;
}

export interface MockResponder {
  match: (url: string, init?: RequestInit) => boolean;
  status?: number;
  body: unknown;
  delayMs?: number;
}

/** A fetch substitute that serves canned JSON and records every call. */
export function mockFetch(responders: MockResponder[]): {
  fetcher: FetchLike;
  calls: RecordedCall[];
} {
  const calls: RecordedCall[] = [];
  const fetcher: FetchLike = async (url, init) => {
    calls.push({ url, init });
    const responder = responders.find((r) => r.match(url, init));
    if (!responder) {
      throw new Error(`no mock responder for ${url}`);
    }
    if (responder.delayMs) {
      await new Promise((resolve) => setTimeout(resolve, responder.delayMs));
    }
    const status = responder.status ?? 200;
    return new Response(JSON.stringify(responder.body), {
      status,
      headers: { "content-type": "application/json" },
    });
  };
  return { fetcher, calls };
}

export function clientFor(responders: MockResponder[]): {
  api: ApiClient;
  calls: RecordedCall[];
} {
  const { fetcher, calls } = mockFetch(responders);
  return { api: new ApiClient("", fetcher), calls };
}
