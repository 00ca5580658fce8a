import { ApiClient, LatestRequestGate } from "./api.js";
import { ApiRequestError } from "./errors.js";
import type { OffsetInstance, OffsetPlan, OffsetProject } from "./types.js";
import { validateOffsetInstance } from "./validate.js";

/**
 * Offset-planning view: a mode toggle (spend a budget vs. hit a target),
 * an editable project table with enable switches and budget-share floors,
 * and the returned plan (or its infeasibility diagnostics) rendered below.
 * The form serializes to exactly the instance the API accepts, and any
 * instance can be loaded back into the form without loss.
 */
export class OffsetPage {
  private readonly gate = new LatestRequestGate();
  lastPlan: OffsetPlan | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  renderForm(facilityId: string, initial?: OffsetInstance): void {
    this.root.replaceChildren();
    const heading = document.createElement("h2");
    heading.textContent = `Offset planning — ${facilityId}`;
    this.root.appendChild(heading);

    const form = document.createElement("form");
    form.className = "offset-form";
    form.noValidate = true;
    form.innerHTML = `
      <fieldset class="mode-toggle">
        <label><input type="radio" name="mode" value="max_offset" checked>
          Maximize offset within a budget</label>
        <label><input type="radio" name="mode" value="min_cost">
          Minimize cost for a target offset</label>
      </fieldset>
      <label class="budget-field">Budget (minor units)
        <input name="budget" type="number" step="1"></label>
      <label class="target-field">Target offset (MTCO2e)
        <input name="target_offset" type="number" step="1"></label>
      <table class="project-table">
        <thead><tr>
          <th>On</th><th>Project</th><th>Unit cost</th>
          <th>Share floor</th><th>Notes</th><th></th>
        </tr></thead>
        <tbody></tbody>
      </table>
      <button type="button" class="add-project">Add project</button>
      <button type="submit">Recommend plan</button>
      <ul class="form-errors" role="alert"></ul>
    `;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit(facilityId, form);
    });
    (form.querySelector(".add-project") as HTMLButtonElement).addEventListener(
      "click",
      () => this.addProjectRow(form),
    );
    this.root.appendChild(form);

    const results = document.createElement("div");
    results.className = "offset-results";
    this.root.appendChild(results);

    if (initial) {
      this.populateForm(form, initial);
    } else {
      this.addProjectRow(form);
    }
  }

  addProjectRow(form: HTMLFormElement, project?: OffsetProject): void {
    const body = form.querySelector(".project-table tbody") as HTMLElement;
    const row = document.createElement("tr");
    row.className = "project-row";
    row.innerHTML = `
      <td><input type="checkbox" name="enabled" checked></td>
      <td><input name="name" placeholder="project name"></td>
      <td><input name="unit_cost" type="number" step="1"></td>
      <td><input name="min_share" type="number" step="any" value="0"></td>
      <td><input name="annotations" placeholder="comma-separated notes"></td>
      <td><button type="button" class="remove-project">Remove</button></td>
    `;
    (row.querySelector(".remove-project") as HTMLButtonElement)
      .addEventListener("click", () => row.remove());
    if (project) {
      (row.querySelector("[name=enabled]") as HTMLInputElement).checked =
        project.enabled;
      (row.querySelector("[name=name]") as HTMLInputElement).value =
        project.name;
      (row.querySelector("[name=unit_cost]") as HTMLInputElement).value =
        String(project.unit_cost);
      (row.querySelector("[name=min_share]") as HTMLInputElement).value =
        String(project.min_share);
      (row.querySelector("[name=annotations]") as HTMLInputElement).value =
        project.annotations.join(",");
    }
    body.appendChild(row);
  }

  /** Loads an instance into the form; readForm() then returns it unchanged. */
  populateForm(form: HTMLFormElement, instance: OffsetInstance): void {
    const mode = form.querySelector(
      `[name=mode][value=${instance.mode}]`,
    ) as HTMLInputElement;
    mode.checked = true;
    (form.querySelector("[name=budget]") as HTMLInputElement).value =
      instance.budget === null ? "" : String(instance.budget);
    (form.querySelector("[name=target_offset]") as HTMLInputElement).value =
      instance.target_offset === null ? "" : String(instance.target_offset);
    const body = form.querySelector(".project-table tbody") as HTMLElement;
    body.replaceChildren();
    for (const project of instance.projects) {
      this.addProjectRow(form, project);
    }
  }

  /** Serializes the current form state to the API instance shape. */
  readForm(form: HTMLFormElement): OffsetInstance {
    const mode = (form.querySelector("[name=mode]:checked") as HTMLInputElement)
      .value as OffsetInstance["mode"];
    const budgetRaw = (form.querySelector("[name=budget]") as HTMLInputElement)
      .value.trim();
    const targetRaw = (form.querySelector(
      "[name=target_offset]",
    ) as HTMLInputElement).value.trim();
    const projects: OffsetProject[] = [];
    for (const row of form.querySelectorAll(".project-row")) {
      const get = (name: string) =>
        (row.querySelector(`[name=${name}]`) as HTMLInputElement);
      const notes = get("annotations").value.trim();
      projects.push({
        name: get("name").value.trim(),
        unit_cost: Number(get("unit_cost").value),
        min_share: Number(get("min_share").value),
        enabled: get("enabled").checked,
        annotations: notes === "" ? [] : notes.split(","),
      });
    }
    return {
      mode,
      budget: budgetRaw === "" ? null : Number(budgetRaw),
      target_offset: targetRaw === "" ? null : Number(targetRaw),
      projects,
    };
  }

  async submit(facilityId: string, form: HTMLFormElement): Promise<boolean> {
    const instance = this.readForm(form);
    const errorBox = form.querySelector(".form-errors") as HTMLElement;
    errorBox.replaceChildren();
    const problems = validateOffsetInstance(instance);
    if (problems.length) {
      for (const problem of problems) {
        const item = document.createElement("li");
        item.textContent = problem;
        errorBox.appendChild(item);
      }
      return false;
    }
    await this.gate.run(
      async () => {
        try {
          return await this.api.offsetRecommend(facilityId, instance);
        } catch (err) {
          if (err instanceof ApiRequestError && err.status === 422) {
            return {
              allocations: {},
              total_offset: 0,
              total_cost: 0,
              feasible: false,
              violations: err.violations,
            } satisfies OffsetPlan;
          }
          throw err;
        }
      },
      (plan) => this.renderPlan(plan),
    );
    return true;
  }

  renderPlan(plan: OffsetPlan): void {
    this.lastPlan = plan;
    const container =
      (this.root.querySelector(".offset-results") as HTMLElement | null) ??
      this.root;
    container.replaceChildren();

    if (!plan.feasible) {
      const note = document.createElement("div");
      note.className = "infeasible-note";
      const text = document.createElement("p");
      text.textContent = "No feasible plan. Violated constraints:";
      note.appendChild(text);
      const list = document.createElement("ul");
      for (const violation of plan.violations) {
        const item = document.createElement("li");
        item.textContent = violation;
        list.appendChild(item);
      }
      note.appendChild(list);
      container.appendChild(note);
      return;
    }

    const summary = document.createElement("p");
    summary.className = "plan-summary";
    summary.textContent =
      `Offsets ${plan.total_offset.toLocaleString()} MTCO2e for ` +
      `${plan.total_cost.toLocaleString()} (minor units)` +
      (plan.emissions_liability_mtco2e !== undefined
        ? ` · forecast liability ${plan.emissions_liability_mtco2e.toLocaleString()} MTCO2e`
        : "");
    container.appendChild(summary);

    const table = document.createElement("table");
    table.className = "allocation-table";
    table.innerHTML = "<thead><tr><th>Project</th><th>Units</th></tr></thead>";
    const body = document.createElement("tbody");
    for (const [name, units] of Object.entries(plan.allocations)) {
      const row = document.createElement("tr");
      const nameCell = document.createElement("td");
      nameCell.textContent = name;
      const unitsCell = document.createElement("td");
      unitsCell.textContent = String(units);
      row.append(nameCell, unitsCell);
      body.appendChild(row);
    }
    table.appendChild(body);
    container.appendChild(table);
  }
}
