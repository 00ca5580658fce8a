import type { ApiClient } from "./api.js";
import type { FacilityConfig } from "./types.js";

/**
 * Landing view: the facility list drives which facility every other page
 * operates on. Selection is kept in the URL hash so it survives reloads.
 */
export class FacilityPicker {
  facilities: FacilityConfig[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
    private readonly onSelect: (facilityId: string) => void,
  ) {}

  async load(): Promise<void> {
    this.facilities = await this.api.facilities();
    this.render();
  }

  render(selected?: string): void {
    this.root.replaceChildren();
    const heading = document.createElement("h2");
    heading.textContent = "Facilities";
    this.root.appendChild(heading);

    const list = document.createElement("ul");
    list.className = "facility-list";
    for (const fc of this.facilities) {
      const item = document.createElement("li");
      const button = document.createElement("button");
      button.type = "button";
      button.dataset.facilityId = fc.facility_id;
      button.textContent = `${fc.name} (${fc.facility_id})`;
      if (fc.facility_id === selected) {
        button.classList.add("selected");
      }
      button.addEventListener("click", () => this.onSelect(fc.facility_id));
      item.appendChild(button);

      const meta = document.createElement("span");
      meta.className = "facility-meta";
      meta.textContent =
        ` emission factor ${fc.emission_factor} · retention ` +
        `${fc.retention_months} months · ${fc.timezone}`;
      item.appendChild(meta);
      list.appendChild(item);
    }
    this.root.appendChild(list);
  }
}
