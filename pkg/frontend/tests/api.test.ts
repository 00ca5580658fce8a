import { describe, expect, it } from "vitest";
import { LatestRequestGate } from "../src/api.js";
import { ApiRequestError } from "../src/errors.js";
import { clientFor } from "./helpers.js";
import {
  buildAskGrid,
  validateAskGrid,
  validateHorizon,
  validateOffsetInstance,
  validateRates,
} from "../src/validate.js";

describe("LatestRequestGate", () => {
  it("discards a slow response when a newer request has started", async () => {
    const gate = new LatestRequestGate();
    const applied: string[] = [];
    let releaseFirst!: () => void;
    const first = gate.run(
      () =>
        new Promise<string>((resolve) => {
          releaseFirst = () => resolve("stale");
        }),
      (v) => applied.push(v),
    );
    const second = gate.run(
      () => Promise.resolve("fresh"),
      (v) => applied.push(v),
    );
    expect(await second).toBe(true);
    releaseFirst();
    expect(await first).toBe(false);
    expect(applied).toEqual(["fresh"]); // the stale value was never applied
  });

  it("applies in-order responses normally", async () => {
    const gate = new LatestRequestGate();
    const applied: number[] = [];
    await gate.run(() => Promise.resolve(1), (v) => applied.push(v));
    await gate.run(() => Promise.resolve(2), (v) => applied.push(v));
    expect(applied).toEqual([1, 2]);
  });
});

describe("ApiClient error mapping", () => {
  it("raises ApiRequestError with the body's error name and violations", async () => {
    const { api } = clientFor([
      {
        match: (url) => url.endsWith("/facilities"),
        status: 409,
        body: {
          error: "MissingPrerequisiteError",
          detail: "retrain first",
          violations: ["no active model"],
        },
      },
    ]);
    const err = await api.facilities().catch((e) => e);
    expect(err).toBeInstanceOf(ApiRequestError);
    expect(err.status).toBe(409);
    expect(err.errorName).toBe("MissingPrerequisiteError");
    expect(err.detail).toBe("retrain first");
    expect(err.violations).toEqual(["no active model"]);
  });

  it("returns parsed JSON on success", async () => {
    const payload = [{ facility_id: "fac1" }];
    const { api, calls } = clientFor([
      { match: (url) => url.endsWith("/facilities"), body: payload },
    ]);
    expect(await api.facilities()).toEqual(payload);
    expect(calls[0].url).toBe("/facilities");
  });
});

describe("client-side validation", () => {
  it("accepts horizons 1..12 and rejects the rest", () => {
    expect(validateHorizon(1)).toBeNull();
    expect(validateHorizon(12)).toBeNull();
    for (const bad of [0, 13, -1, 2.5]) {
      expect(validateHorizon(bad)).not.toBeNull();
    }
  });

  it("requires positive rates", () => {
    expect(validateRates(0.9, 1.2)).toBeNull();
    expect(validateRates(0, 1.2)).not.toBeNull();
    expect(validateRates(0.9, -3)).not.toBeNull();
  });

  it("builds inclusive ask grids", () => {
    expect(validateAskGrid(0, 10, 2.5)).toBeNull();
    expect(buildAskGrid(0, 10, 2.5)).toEqual([0, 2.5, 5, 7.5, 10]);
    expect(validateAskGrid(5, 4, 1)).not.toBeNull();
    expect(validateAskGrid(0, 10, 0)).not.toBeNull();
  });

  it("flags every broken offset-instance invariant", () => {
    const problems = validateOffsetInstance({
      mode: "max_offset",
      budget: null,
      target_offset: null,
      projects: [
        {
          name: "",
          unit_cost: 2.5,
          min_share: 1.5,
          enabled: true,
          annotations: [],
        },
      ],
    });
    expect(problems.join(" ")).toContain("budget");
    expect(problems.join(" ")).toContain("name");
    expect(problems.join(" ")).toContain("unit cost");
    expect(problems.join(" ")).toContain("share floor");
  });

  it("ignores disabled projects in the share-floor sum", () => {
    const problems = validateOffsetInstance({
      mode: "max_offset",
      budget: 100,
      target_offset: null,
      projects: [
        { name: "a", unit_cost: 3, min_share: 0.8, enabled: true, annotations: [] },
        { name: "b", unit_cost: 7, min_share: 0.8, enabled: false, annotations: [] },
      ],
    });
    expect(problems).toEqual([]);
  });
});
