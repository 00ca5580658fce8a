import { beforeEach, describe, expect, it } from "vitest";
import { ForecastPage } from "../src/forecastPage.js";
import type { ForecastBundle, HistoryPayload } from "../src/types.js";
import { clientFor } from "./helpers.js";

function bundleFor(month: string): ForecastBundle {
  const daily_occupancy: Record<string, number> = {};
  const daily_kwh: Record<string, number> = {};
  let total = 0;
  for (let day = 1; day <= 3; day += 1) {
    const iso = `${month}-${String(day).padStart(2, "0")}`;
    daily_occupancy[iso] = 700 + day;
    daily_kwh[iso] = 3000 + day * 10;
    total += daily_kwh[iso];
  }
  return {
    facility_id: "fac1",
    month,
    daily_occupancy,
    daily_kwh,
    monthly_kwh: total,
    generated_at: "2020-08-01T00:00:00Z",
  };
}

function historyFor(month: string, bundle: ForecastBundle): HistoryPayload {
  const days: HistoryPayload["days"] = {};
  for (const [iso, forecast] of Object.entries(bundle.daily_kwh)) {
    days[iso] = { actual_kwh: forecast - 5, forecast_kwh: forecast, quality: "observed" };
  }
  return {
    facility_id: "fac1",
    month,
    days,
    monthly_actual_kwh: bundle.monthly_kwh - 15,
    monthly_forecast_kwh: bundle.monthly_kwh,
    forecast_generated_at: bundle.generated_at,
  };
}

describe("forecast & history page", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "<div id='root'></div>";
    root = document.getElementById("root") as HTMLElement;
  });

  it("renders two months side by side with actual-vs-forecast overlays", async () => {
    const months = ["2020-07", "2020-08"];
    const responders = months.flatMap((m) => {
      const bundle = bundleFor(m);
      return [
        {
          match: (url: string) =>
            url.includes("/forecast") && url.includes(`month=${m}`),
          body: bundle,
        },
        {
          match: (url: string) =>
            url.includes("/history") && url.includes(`month=${m}`),
          body: historyFor(m, bundle),
        },
      ];
    });
    const { api } = clientFor(responders);
    const page = new ForecastPage(api, root);
    await page.show("fac1", months);

    const panels = [...root.querySelectorAll(".month-panel")];
    expect(panels.map((p) => (p as HTMLElement).dataset.month)).toEqual(months);
    for (const panel of panels) {
      expect(panel.querySelector(".chart-occupancy svg")).not.toBeNull();
      expect(panel.querySelector(".series-forecast")).not.toBeNull();
      expect(panel.querySelector(".series-actual")).not.toBeNull();
    }
    // The headline totals come straight from the mocked responses.
    const july = bundleFor("2020-07");
    expect(panels[0].querySelector(".monthly-total")!.textContent).toContain(
      july.monthly_kwh.toLocaleString(),
    );
    expect(panels[0].querySelector(".monthly-total")!.textContent).toContain(
      (july.monthly_kwh - 15).toLocaleString(),
    );
  });

  it("shows a retrain call-to-action on a 409 missing-model response", async () => {
    const { api } = clientFor([
      {
        match: (url) => url.includes("/forecast") || url.includes("/history"),
        status: 409,
        body: {
          error: "MissingPrerequisiteError",
          detail: "no active model pair for fac1 2020-08; retrain first",
        },
      },
    ]);
    const page = new ForecastPage(api, root);
    await page.show("fac1", ["2020-08"]);

    const cta = root.querySelector(".retrain-cta") as HTMLButtonElement;
    expect(cta).not.toBeNull();
    expect(cta.textContent).toContain("Retrain");
    expect(root.querySelector(".error-note")!.textContent).toContain(
      "retrain first",
    );
    expect(root.querySelector(".chart-kwh svg")).toBeNull();
  });
});
