/**
 * Filter panel: checkbox groups populated from /filters/options, metric
 * switch, manual time-range fields (validated inline), timeline bin width
 * and a log-scale toggle. Every edit funnels through the shared ViewState,
 * so all visible views move together.
 */

import { FilterState, Metric, OptionsPayload } from "../api.js";
import { ViewState } from "../state.js";
import { clear } from "./util.js";

type SetKey = "transports" | "uct_fns" | "mpi_fns" | "nodes" | "procs";

const GROUPS: [SetKey, string][] = [
  ["transports", "transports"],
  ["uct_fns", "transport functions"],
  ["mpi_fns", "MPI functions"],
  ["nodes", "nodes"],
  ["procs", "processes"],
];

export interface FilterPanelHooks {
  onLogScale?: (enabled: boolean) => void;
}

export function renderFilterPanel(
  container: HTMLElement,
  options: OptionsPayload,
  state: ViewState,
  hooks: FilterPanelHooks = {},
): void {
  clear(container);

  const selected = new Map<SetKey, Set<string>>(GROUPS.map(([key]) => [key, new Set()]));

  const push = (key: SetKey) => {
    const set = selected.get(key)!;
    const patch: Partial<FilterState> = {};
    patch[key] = set.size ? [...set].sort() : null;
    void state.update(patch);
  };

  for (const [key, title] of GROUPS) {
    const values = options[key];
    if (!values.length) continue;
    const fieldset = document.createElement("fieldset");
    fieldset.dataset.group = key;
    const legend = document.createElement("legend");
    legend.textContent = title;
    fieldset.appendChild(legend);
    for (const value of values) {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.value = value;
      box.dataset.group = key;
      box.addEventListener("change", () => {
        if (box.checked) selected.get(key)!.add(value);
        else selected.get(key)!.delete(value);
        push(key);
      });
      label.appendChild(box);
      label.appendChild(document.createTextNode(value));
      fieldset.appendChild(label);
    }
    container.appendChild(fieldset);
  }

  // metric switch
  const metricSet = document.createElement("fieldset");
  metricSet.dataset.group = "metric";
  const legend = document.createElement("legend");
  legend.textContent = "metric";
  metricSet.appendChild(legend);
  for (const metric of options.metrics) {
    const label = document.createElement("label");
    const radio = document.createElement("input");
    radio.type = "radio";
    radio.name = "metric";
    radio.value = metric;
    radio.checked = metric === state.filter.metric;
    radio.addEventListener("change", () => {
      if (radio.checked) void state.update({ metric: metric as Metric });
    });
    label.appendChild(radio);
    label.appendChild(document.createTextNode(metric));
    metricSet.appendChild(label);
  }
  container.appendChild(metricSet);

  // manual time range, validated inline
  const timeSet = document.createElement("fieldset");
  timeSet.dataset.group = "time";
  const timeLegend = document.createElement("legend");
  timeLegend.textContent = "time range (ns)";
  timeSet.appendChild(timeLegend);
  const error = document.createElement("span");
  error.className = "field-error";
  error.hidden = true;

  const makeTimeInput = (name: "t_min" | "t_max", placeholder: string) => {
    const input = document.createElement("input");
    input.type = "text";
    input.name = name;
    input.placeholder = placeholder;
    input.addEventListener("change", () => {
      const raw = input.value.trim();
      if (raw === "") {
        input.classList.remove("invalid");
        error.hidden = true;
        void state.update({ [name]: null } as Partial<FilterState>);
        return;
      }
      if (!/^[0-9]+$/.test(raw)) {
        input.classList.add("invalid");
        error.textContent = `${name} must be an unsigned integer`;
        error.hidden = false;
        return;
      }
      input.classList.remove("invalid");
      error.hidden = true;
      void state.update({ [name]: Number(raw) } as Partial<FilterState>);
    });
    return input;
  };
  timeSet.appendChild(makeTimeInput("t_min", options.t_min === null ? "start" : String(options.t_min)));
  timeSet.appendChild(makeTimeInput("t_max", options.t_max === null ? "end" : String(options.t_max)));
  timeSet.appendChild(error);
  container.appendChild(timeSet);

  // timeline controls
  const tlSet = document.createElement("fieldset");
  tlSet.dataset.group = "timeline";
  const tlLegend = document.createElement("legend");
  tlLegend.textContent = "timeline";
  tlSet.appendChild(tlLegend);
  const logLabel = document.createElement("label");
  const logBox = document.createElement("input");
  logBox.type = "checkbox";
  logBox.name = "log_scale";
  logBox.addEventListener("change", () => hooks.onLogScale?.(logBox.checked));
  logLabel.appendChild(logBox);
  logLabel.appendChild(document.createTextNode("log scale"));
  tlSet.appendChild(logLabel);
  container.appendChild(tlSet);

  const reset = document.createElement("button");
  reset.textContent = "clear filters";
  reset.className = "clear-filters";
  reset.addEventListener("click", () => {
    for (const set of selected.values()) set.clear();
    container.querySelectorAll<HTMLInputElement>("input[type=checkbox][data-group]").forEach(
      (box) => { box.checked = false; },
    );
    container.querySelectorAll<HTMLInputElement>("input[type=text]").forEach((input) => {
      input.value = "";
      input.classList.remove("invalid");
    });
    error.hidden = true;
    void state.clearFilters();
  });
  container.appendChild(reset);
}
