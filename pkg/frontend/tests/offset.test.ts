import { beforeEach, describe, expect, it } from "vitest";
import { OffsetPage } from "../src/offsetPage.js";
import type { OffsetInstance, OffsetPlan } from "../src/types.js";
import { validateOffsetInstance } from "../src/validate.js";
import { clientFor } from "./helpers.js";

const INSTANCE: OffsetInstance = {
  mode: "max_offset",
  budget: 100,
  target_offset: null,
  projects: [
    {
      name: "solar",
      unit_cost: 10,
      min_share: 0.25,
      enabled: true,
      annotations: ["state incentive"],
    },
    {
      name: "wind",
      unit_cost: 50,
      min_share: 0.5,
      enabled: true,
      annotations: [],
    },
    {
      name: "retired",
      unit_cost: 7,
      min_share: 0.9,
      enabled: false,
      annotations: ["paused", "pending audit"],
    },
  ],
};

describe("offset page", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "<div id='root'></div>";
    root = document.getElementById("root") as HTMLElement;
  });

  it("round-trips an instance through the form losslessly", () => {
    const { api } = clientFor([]);
    const page = new OffsetPage(api, root);
    page.renderForm("fac1", INSTANCE);
    const form = root.querySelector("form") as HTMLFormElement;
    expect(page.readForm(form)).toEqual(INSTANCE);
  });

  it("round-trips a min_cost instance with empty budget", () => {
    const { api } = clientFor([]);
    const page = new OffsetPage(api, root);
    const instance: OffsetInstance = {
      mode: "min_cost",
      budget: null,
      target_offset: 4,
      projects: INSTANCE.projects.slice(0, 1),
    };
    page.renderForm("fac1", instance);
    const form = root.querySelector("form") as HTMLFormElement;
    expect(page.readForm(form)).toEqual(instance);
  });

  it("blocks submission when enabled share floors sum above 1", async () => {
    const { api, calls } = clientFor([]);
    const page = new OffsetPage(api, root);
    const bad: OffsetInstance = {
      ...INSTANCE,
      projects: INSTANCE.projects.map((p) => ({
        ...p,
        enabled: true,
        min_share: 0.6,
      })),
    };
    expect(validateOffsetInstance(bad).join(" ")).toContain("share floors");

    page.renderForm("fac1", bad);
    const form = root.querySelector("form") as HTMLFormElement;
    const submitted = await page.submit("fac1", form);

    expect(submitted).toBe(false);
    expect(calls.length).toBe(0); // nothing reached the network
    const shown = [...root.querySelectorAll(".form-errors li")].map(
      (li) => li.textContent,
    );
    expect(shown.join(" ")).toContain("must be ≤ 1");
  });

  it("submits a valid instance and renders the returned plan verbatim", async () => {
    const plan: OffsetPlan = {
      allocations: { solar: 5, wind: 1 },
      total_offset: 6,
      total_cost: 100,
      feasible: true,
      violations: [],
    };
    const { api, calls } = clientFor([
      { match: (url) => url.includes("/offset/recommend"), body: plan },
    ]);
    const page = new OffsetPage(api, root);
    page.renderForm("fac1", INSTANCE);
    const form = root.querySelector("form") as HTMLFormElement;
    const submitted = await page.submit("fac1", form);

    expect(submitted).toBe(true);
    expect(calls.length).toBe(1);
    expect(JSON.parse(String(calls[0].init?.body))).toEqual(INSTANCE);
    expect(page.lastPlan).toEqual(plan);
    const cells = [...root.querySelectorAll(".allocation-table tbody td")].map(
      (td) => td.textContent,
    );
    expect(cells).toEqual(["solar", "5", "wind", "1"]);
    expect(root.querySelector(".plan-summary")!.textContent).toContain("6");
  });

  it("renders infeasibility diagnostics from a 422 response", async () => {
    const { api } = clientFor([
      {
        match: (url) => url.includes("/offset/recommend"),
        status: 422,
        body: {
          error: "InfeasibleError",
          violations: ["share floors of wind and solar exceed the budget"],
        },
      },
    ]);
    const page = new OffsetPage(api, root);
    page.renderForm("fac1", INSTANCE);
    const form = root.querySelector("form") as HTMLFormElement;
    await page.submit("fac1", form);

    const note = root.querySelector(".infeasible-note");
    expect(note).not.toBeNull();
    expect(note!.textContent).toContain("exceed the budget");
  });
});
