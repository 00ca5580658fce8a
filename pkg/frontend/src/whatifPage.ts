import { ApiClient, LatestRequestGate } from "./api.js";
import { renderLineChart, type Series } from "./chart.js";
import type { WhatifPoint, WhatifResponse } from "./types.js";
import { buildAskGrid, validateAskGrid, validateRates } from "./validate.js";

export interface WhatifFormValues {
  month: string;
  greenRate: number;
  conventionalRate: number;
  gridStart: number;
  gridStop: number;
  gridStep: number;
}

/**
 * Financial-modeling view: a rates + ask-grid form posted to the what-if
 * endpoint; the returned curve is rendered as cost-vs-ask and
 * utilization-vs-ask, with the breakpoint (ask equal to the forecast
 * consumption, where overrun billing stops) marked on both charts. Every
 * number shown comes from the response; the page computes nothing.
 */
export class WhatifPage {
  private readonly gate = new LatestRequestGate();
  lastResponse: WhatifResponse | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  renderForm(facilityId: string, defaults?: Partial<WhatifFormValues>): void {
    this.root.replaceChildren();
    const heading = document.createElement("h2");
    heading.textContent = `Procurement what-if — ${facilityId}`;
    this.root.appendChild(heading);

    const form = document.createElement("form");
    form.className = "whatif-form";
    form.noValidate = true;
    form.innerHTML = `
      <label>Month <input name="month" placeholder="2020-08"
        value="${defaults?.month ?? ""}"></label>
      <label>Green rate <input name="green_rate" type="number" step="any"
        value="${defaults?.greenRate ?? 0.9}"></label>
      <label>Conventional rate <input name="conventional_rate" type="number"
        step="any" value="${defaults?.conventionalRate ?? 1.2}"></label>
      <label>Ask from <input name="grid_start" type="number" step="any"
        value="${defaults?.gridStart ?? 0}"></label>
      <label>to <input name="grid_stop" type="number" step="any"
        value="${defaults?.gridStop ?? 0}"></label>
      <label>step <input name="grid_step" type="number" step="any"
        value="${defaults?.gridStep ?? 1}"></label>
      <button type="submit">Simulate</button>
      <p class="form-errors" role="alert"></p>
    `;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit(facilityId, form);
    });
    this.root.appendChild(form);

    const results = document.createElement("div");
    results.className = "whatif-results";
    this.root.appendChild(results);
  }

  async submit(facilityId: string, form: HTMLFormElement): Promise<void> {
    const data = new FormData(form);
    const values: WhatifFormValues = {
      month: String(data.get("month") ?? ""),
      greenRate: Number(data.get("green_rate")),
      conventionalRate: Number(data.get("conventional_rate")),
      gridStart: Number(data.get("grid_start")),
      gridStop: Number(data.get("grid_stop")),
      gridStep: Number(data.get("grid_step")),
    };
    const errorBox = form.querySelector(".form-errors") as HTMLElement;
    const problems = [
      validateRates(values.greenRate, values.conventionalRate),
      validateAskGrid(values.gridStart, values.gridStop, values.gridStep),
    ].filter((p): p is string => p !== null);
    if (problems.length) {
      errorBox.textContent = problems.join("; ");
      return;
    }
    errorBox.textContent = "";
    await this.gate.run(
      () =>
        this.api.whatif(facilityId, {
          month: values.month,
          rates: {
            green_rate: values.greenRate,
            conventional_rate: values.conventionalRate,
          },
          ask_grid: buildAskGrid(values.gridStart, values.gridStop, values.gridStep),
        }),
      (response) => this.renderCurve(response),
    );
  }

  renderCurve(response: WhatifResponse): void {
    this.lastResponse = response;
    const container =
      (this.root.querySelector(".whatif-results") as HTMLElement | null) ??
      this.root;
    container.replaceChildren();

    const consumption = document.createElement("p");
    consumption.className = "whatif-consumption";
    consumption.textContent =
      `Forecast consumption: ${response.consumption_kwh.toLocaleString()} kWh`;
    container.appendChild(consumption);

    const costSeries: Series = {
      label: "total cost",
      cssClass: "series-cost",
      points: response.points.map((p) => [p.ask, p.total_cost]),
    };
    const utilSeries: Series = {
      label: "GP utilization",
      cssClass: "series-utilization",
      points: response.points.map((p) => [p.ask, p.gp_utilization]),
    };
    const costBox = document.createElement("div");
    costBox.className = "chart-box chart-cost";
    renderLineChart(costBox, [costSeries], { markX: response.consumption_kwh });
    container.appendChild(costBox);
    const utilBox = document.createElement("div");
    utilBox.className = "chart-box chart-utilization";
    renderLineChart(utilBox, [utilSeries], { markX: response.consumption_kwh });
    container.appendChild(utilBox);

    const cheapest = response.points.reduce((a, b) =>
      b.total_cost < a.total_cost ? b : a,
    );
    container.appendChild(this.renderInvoice(cheapest));
  }

  /** Simulated invoice for one grid point, straight from the response. */
  private renderInvoice(point: WhatifPoint): HTMLElement {
    const box = document.createElement("dl");
    box.className = "invoice-detail";
    const rows: Array<[string, string]> = [
      ["Ask", point.ask.toLocaleString()],
      ["Total cost", point.total_cost.toLocaleString()],
      ["Green billed kWh", point.green_billed_kwh.toLocaleString()],
      ["Conventional billed kWh", point.conventional_billed_kwh.toLocaleString()],
      ["Green consumed kWh", point.green_consumed_kwh.toLocaleString()],
      ["GP utilization", point.gp_utilization.toLocaleString()],
      ["Wasted green kWh", point.wasted_green_kwh.toLocaleString()],
    ];
    for (const [label, value] of rows) {
      const dt = document.createElement("dt");
      dt.textContent = label;
      const dd = document.createElement("dd");
      dd.textContent = value;
      box.appendChild(dt);
      box.appendChild(dd);
    }
    return box;
  }
}
