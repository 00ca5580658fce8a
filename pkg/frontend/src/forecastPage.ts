import { ApiClient, LatestRequestGate } from "./api.js";
import { ApiRequestError } from "./errors.js";
import { renderLineChart, type Series } from "./chart.js";
import type { ForecastBundle, HistoryPayload } from "./types.js";
import { isValidMonth } from "./validate.js";

interface MonthPanelData {
  month: string;
  bundle: ForecastBundle | null;
  history: HistoryPayload | null;
  error: ApiRequestError | null;
}

function dayNumber(isoDate: string): number {
  return Number(isoDate.slice(8, 10));
}

/**
 * Forecast & history view: for each requested month, the daily occupancy and
 * kWh forecast plus the actual-vs-forecast overlay from the history endpoint.
 * Multiple months render side by side for comparison. A missing model (409)
 * renders a retrain call-to-action instead of a chart.
 */
export class ForecastPage {
  private readonly gate = new LatestRequestGate();

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  async show(facilityId: string, monthsToShow: string[]): Promise<void> {
    const valid = monthsToShow.filter(isValidMonth);
    await this.gate.run(
      () => Promise.all(valid.map((m) => this.loadMonth(facilityId, m))),
      (panels) => this.render(facilityId, panels),
    );
  }

  private async loadMonth(
    facilityId: string,
    month: string,
  ): Promise<MonthPanelData> {
    try {
      const [bundle, history] = await Promise.all([
        this.api.forecast(facilityId, month),
        this.api.history(facilityId, month),
      ]);
      return { month, bundle, history, error: null };
    } catch (err) {
      if (err instanceof ApiRequestError) {
        return { month, bundle: null, history: null, error: err };
      }
      throw err;
    }
  }

  render(facilityId: string, panels: MonthPanelData[]): void {
    this.root.replaceChildren();
    const heading = document.createElement("h2");
    heading.textContent = `Forecast & history — ${facilityId}`;
    this.root.appendChild(heading);

    const row = document.createElement("div");
    row.className = "panel-row";
    for (const panel of panels) {
      row.appendChild(this.renderPanel(facilityId, panel));
    }
    this.root.appendChild(row);
  }

  private renderPanel(facilityId: string, panel: MonthPanelData): HTMLElement {
    const box = document.createElement("section");
    box.className = "month-panel";
    box.dataset.month = panel.month;

    const title = document.createElement("h3");
    title.textContent = panel.month;
    box.appendChild(title);

    if (panel.error) {
      box.appendChild(this.renderError(facilityId, panel));
      return box;
    }
    const bundle = panel.bundle!;
    const history = panel.history!;

    const total = document.createElement("p");
    total.className = "monthly-total";
    total.textContent =
      `Forecast ${bundle.monthly_kwh.toLocaleString()} kWh` +
      (history.monthly_actual_kwh !== null
        ? ` · actual ${history.monthly_actual_kwh.toLocaleString()} kWh`
        : "");
    box.appendChild(total);

    const occSeries: Series = {
      label: "occupancy",
      cssClass: "series-occupancy",
      points: Object.entries(bundle.daily_occupancy)
        .sort(([a], [b]) => a.localeCompare(b))
        .map(([d, v]) => [dayNumber(d), v]),
    };
    const occBox = document.createElement("div");
    occBox.className = "chart-box chart-occupancy";
    renderLineChart(occBox, [occSeries], { width: 420, height: 180 });
    box.appendChild(occBox);

    const kwhSeries: Series[] = [];
    const forecastPoints: Array<[number, number]> = [];
    const actualPoints: Array<[number, number]> = [];
    for (const [d, day] of Object.entries(history.days).sort(([a], [b]) =>
      a.localeCompare(b),
    )) {
      if (day.forecast_kwh !== null) forecastPoints.push([dayNumber(d), day.forecast_kwh]);
      if (day.actual_kwh !== null) actualPoints.push([dayNumber(d), day.actual_kwh]);
    }
    if (forecastPoints.length) {
      kwhSeries.push({ label: "forecast kWh", cssClass: "series-forecast", points: forecastPoints });
    }
    if (actualPoints.length) {
      kwhSeries.push({ label: "actual kWh", cssClass: "series-actual", points: actualPoints });
    }
    const kwhBox = document.createElement("div");
    kwhBox.className = "chart-box chart-kwh";
    if (kwhSeries.length) {
      renderLineChart(kwhBox, kwhSeries, { width: 420, height: 180 });
    }
    box.appendChild(kwhBox);
    return box;
  }

  private renderError(facilityId: string, panel: MonthPanelData): HTMLElement {
    const err = panel.error!;
    const note = document.createElement("div");
    note.className = "error-note";
    const text = document.createElement("p");
    text.textContent = err.detail;
    note.appendChild(text);
    if (err.status === 409) {
      const button = document.createElement("button");
      button.type = "button";
      button.className = "retrain-cta";
      button.textContent = `Retrain models for ${panel.month}`;
      button.addEventListener("click", async () => {
        button.disabled = true;
        button.textContent = "Retraining…";
        await this.api.retrain(facilityId, panel.month);
        await this.show(facilityId, [panel.month]);
      });
      note.appendChild(button);
    }
    return note;
  }
}
