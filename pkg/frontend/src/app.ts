/** DOM wiring for the query editor. All logic lives in the pure modules. */

import { submitQuery } from "./api.js";
import { EXAMPLES } from "./examples.js";
import { bindingCount, renderResponse } from "./render.js";
import {
  EditorState,
  FORMATS,
  Format,
  applyFailure,
  applyResponse,
  canSubmit,
  initialState,
  loadExample,
  recordSubmission,
  setEndpoint,
  setFormat,
  setQuery,
} from "./state.js";

const PREFIX_CHEATSHEET: [string, string][] = [
  ["hypercat", "http://portal.bt-hypercat.com/ontologies/bt-hypercat#"],
  ["bt-sensors", "http://api.bt-hypercat.com/sensors/"],
  ["bt-events", "http://api.bt-hypercat.com/events/"],
  ["wgs84_pos", "http://www.w3.org/2003/01/geo/wgs84_pos#"],
  ["xsd", "http://www.w3.org/2001/XMLSchema#"],
];

const ENDPOINTS = ["/sparql/federated", "/sparql/default", "/sparql/sensors",
                   "/sparql/events"];

let state: EditorState = initialState();
let inFlight: AbortController | null = null;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

function syncControls(): void {
  el<HTMLTextAreaElement>("query").value = state.query;
  el<HTMLSelectElement>("endpoint").value = state.endpoint;
  el<HTMLSelectElement>("format").value = state.format;
  el<HTMLButtonElement>("submit").disabled = !canSubmit(state);
}

function renderError(): void {
  const banner = el<HTMLDivElement>("error");
  if (state.lastError) {
    banner.textContent = state.lastError;
    banner.hidden = false;
  } else {
    banner.hidden = true;
  }
}

function renderResults(): void {
  const container = el<HTMLDivElement>("results");
  const status = el<HTMLDivElement>("status");
  container.textContent = "";
  if (!state.lastResponse || state.lastResponse.status !== 200) {
    status.textContent = "";
    return;
  }
  const model = renderResponse(state.format, state.lastResponse.body);
  if (model.kind === "html") {
    container.innerHTML = model.html;
    status.textContent = `${bindingCount("HTML", state.lastResponse.body)} solutions`;
    return;
  }
  const table = document.createElement("table");
  const head = table.createTHead().insertRow();
  for (const name of model.variables) {
    const cell = document.createElement("th");
    cell.textContent = name;
    head.appendChild(cell);
  }
  const tbody = table.createTBody();
  for (const row of model.rows) {
    const tr = tbody.insertRow();
    for (const value of row) {
      tr.insertCell().textContent = value;
    }
  }
  container.appendChild(table);
  status.textContent = `${model.rows.length} solutions`;
}

function renderHistory(): void {
  const list = el<HTMLUListElement>("history");
  list.textContent = "";
  for (const entry of [...state.history].reverse().slice(0, 20)) {
    const item = document.createElement("li");
    const when = new Date(entry.timestamp).toLocaleTimeString();
    item.textContent = `${when} ${entry.endpoint} — ${entry.query.slice(0, 60)}`;
    item.title = entry.query;
    item.addEventListener("click", () => {
      state = setQuery(setEndpoint(state, entry.endpoint), entry.query);
      syncControls();
    });
    list.appendChild(item);
  }
}

async function submit(): Promise<void> {
  if (!canSubmit(state)) {
    return;
  }
  inFlight?.abort();
  inFlight = new AbortController();
  state = recordSubmission(state, Date.now());
  renderHistory();
  try {
    const response = await submitQuery("", state, inFlight.signal);
    if (response.status === 200) {
      state = applyResponse(state, response);
    } else {
      state = applyFailure(
        state, `HTTP ${response.status}: ${response.body}`, response);
    }
  } catch (error) {
    if ((error as Error).name === "AbortError") {
      return;
    }
    state = applyFailure(state, `request failed: ${error}`);
  }
  renderError();
  renderResults();
  syncControls();
}

function init(): void {
  const endpointSelect = el<HTMLSelectElement>("endpoint");
  for (const route of ENDPOINTS) {
    const option = document.createElement("option");
    option.value = route;
    option.textContent = route;
    endpointSelect.appendChild(option);
  }
  const formatSelect = el<HTMLSelectElement>("format");
  for (const format of FORMATS) {
    const option = document.createElement("option");
    option.value = format;
    option.textContent = format;
    formatSelect.appendChild(option);
  }
  const exampleSelect = el<HTMLSelectElement>("examples");
  const placeholder = document.createElement("option");
  placeholder.value = "";
  placeholder.textContent = "Load an example…";
  exampleSelect.appendChild(placeholder);
  for (const example of EXAMPLES) {
    const option = document.createElement("option");
    option.value = example.id;
    option.textContent = example.title;
    exampleSelect.appendChild(option);
  }
  const cheatsheet = el<HTMLTableSectionElement>("prefixes");
  for (const [prefix, iri] of PREFIX_CHEATSHEET) {
    const row = cheatsheet.insertRow();
    row.insertCell().textContent = prefix;
    row.insertCell().textContent = iri;
  }

  el<HTMLTextAreaElement>("query").addEventListener("input", (event) => {
    state = setQuery(state, (event.target as HTMLTextAreaElement).value);
    el<HTMLButtonElement>("submit").disabled = !canSubmit(state);
  });
  endpointSelect.addEventListener("change", () => {
    state = setEndpoint(state, endpointSelect.value);
  });
  formatSelect.addEventListener("change", () => {
    state = setFormat(state, formatSelect.value as Format);
  });
  exampleSelect.addEventListener("change", () => {
    if (exampleSelect.value) {
      state = loadExample(state, exampleSelect.value);
      exampleSelect.value = "";
      syncControls();
    }
  });
  el<HTMLButtonElement>("submit").addEventListener("click", () => {
    void submit();
  });
  syncControls();
}

document.addEventListener("DOMContentLoaded", init);
