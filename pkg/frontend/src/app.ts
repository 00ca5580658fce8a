import { ApiClient } from "./api.js";
import { FacilityPicker } from "./facilities.js";
import { ForecastPage } from "./forecastPage.js";
import { OffsetPage } from "./offsetPage.js";
import { WhatifPage } from "./whatifPage.js";

/**
 * Hash router: #/<facility>/<view>?months=YYYY-MM,YYYY-MM
 * Views: forecast (default), whatif, offset. No facility selected shows the
 * landing list.
 */
interface Route {
  facility: string | null;
  view: string;
  months: string[];
}

export function parseHash(hash: string): Route {
  const [path, query = ""] = hash.replace(/^#\/?/, "").split("?");
  const [facility = "", view = "forecast"] = path.split("/");
  const params = new URLSearchParams(query);
  const months = (params.get("months") ?? "").split(",").filter(Boolean);
  return { facility: facility || null, view, months };
}

export function startApp(root: HTMLElement, api = new ApiClient()): void {
  const nav = document.createElement("nav");
  nav.className = "app-nav";
  const main = document.createElement("main");
  root.append(nav, main);

  const picker = new FacilityPicker(api, nav, (facilityId) => {
    window.location.hash = `#/${facilityId}/forecast`;
  });

  const render = async () => {
    const route = parseHash(window.location.hash);
    picker.render(route.facility ?? undefined);
    main.replaceChildren();
    if (!route.facility) {
      const hint = document.createElement("p");
      hint.textContent = "Select a facility to get started.";
      main.appendChild(hint);
      return;
    }
    if (route.view === "whatif") {
      new WhatifPage(api, main).renderForm(route.facility);
    } else if (route.view === "offset") {
      new OffsetPage(api, main).renderForm(route.facility);
    } else {
      const page = new ForecastPage(api, main);
      const monthsToShow = route.months.length
        ? route.months
        : defaultMonths();
      await page.show(route.facility, monthsToShow);
    }
  };

  window.addEventListener("hashchange", () => void render());
  void picker.load().then(render);
}

/** Current month and the previous one, side by side. */
export function defaultMonths(now = new Date()): string[] {
  const current = `${now.getUTCFullYear()}-${String(now.getUTCMonth() + 1).padStart(2, "0")}`;
  const prev = new Date(Date.UTC(now.getUTCFullYear(), now.getUTCMonth() - 1, 1));
  const previous = `${prev.getUTCFullYear()}-${String(prev.getUTCMonth() + 1).padStart(2, "0")}`;
  return [previous, current];
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  startApp(document.getElementById("app") as HTMLElement);
}
