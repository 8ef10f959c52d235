/** DOM wiring. All diagnostic math happens server-side; this file only
 * moves payloads between the API client, the state module, and the pure
 * renderers. The dashboard and reasoning screens are read-only; the two
 * create endpoints are reachable only from the setup card. */

import { ApiClient, ApiError } from "./api.js";
import { validateMastery } from "./format.js";
import {
  renderComparison,
  renderContrastive,
  renderCounterfactual,
  renderDiagnosis,
  renderItems,
  renderKcs,
  renderOverview,
  renderPattern,
  renderSuggestions,
} from "./render.js";
import {
  ViewState,
  cachePayload,
  initialState,
  loadStudent,
  makeLatestGate,
  reset,
  selectModel,
  setOverride,
  toggleFlip,
} from "./state.js";
import type {
  ComparisonPayload,
  DiagnosePayload,
  ItemsPayload,
  KcsPayload,
  OverviewPayload,
  SuggestionsPayload,
} from "./types.js";

const api = new ApiClient();
const latest = makeLatestGate();
let state: ViewState = initialState();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function flash(message: string, isError = true): void {
  const box = el<HTMLDivElement>("flash");
  box.textContent = message;
  box.className = message ? (isError ? "flash error" : "flash ok") : "flash";
}

async function refreshCatalog(): Promise<void> {
  const [datasets, models] = await Promise.all([api.listDatasets(), api.listModels()]);
  const modelSel = el<HTMLSelectElement>("model-select");
  const current = state.modelId;
  modelSel.innerHTML =
    `<option value="">select a model</option>` +
    models.models
      .map(
        (m) =>
          `<option value="${m.model_id}" data-dataset="${m.dataset_id}"` +
          `${m.model_id === current ? " selected" : ""}>` +
          `${m.model_id} (${m.dataset_id}: ${m.n_students} students, ${m.n_items} items)</option>`,
      )
      .join("");
  const dsSel = el<HTMLSelectElement>("dataset-select");
  dsSel.innerHTML =
    `<option value="">select a dataset</option>` +
    datasets.datasets
      .map(
        (d) =>
          `<option value="${d.dataset_id}">${d.dataset_id}` +
          ` (${d.n_students} students, ${d.n_records} responses)</option>`,
      )
      .join("");
}

async function renderDashboard(): Promise<void> {
  if (!state.modelId) return;
  const modelId = state.modelId;
  const [ov, items, kcs, cmp, sugg] = await Promise.all([
    api.analytics<OverviewPayload>(modelId, "overview"),
    api.analytics<ItemsPayload>(modelId, "items"),
    api.analytics<KcsPayload>(modelId, "kcs"),
    api.analytics<ComparisonPayload>(modelId, "comparison"),
    api.analytics<SuggestionsPayload>(modelId, "suggestions"),
  ]);
  state = cachePayload(state, "overview", ov);
  state = cachePayload(state, "items", items);
  state = cachePayload(state, "kcs", kcs);
  state = cachePayload(state, "comparison", cmp);
  state = cachePayload(state, "suggestions", sugg);
  el("dash-overview").innerHTML = renderOverview(ov);
  el("dash-items").innerHTML = renderItems(items);
  el("dash-kcs").innerHTML = renderKcs(kcs, sugg);
  el("dash-comparison").innerHTML = renderComparison(cmp);
  el("dash-suggestions").innerHTML = renderSuggestions(sugg);
}

async function populateStudents(): Promise<void> {
  if (!state.datasetId) return;
  const detail = await api.getDataset(state.datasetId);
  el<HTMLSelectElement>("student-select").innerHTML =
    `<option value="">select a student</option>` +
    detail.student_ids.map((s) => `<option>${s}</option>`).join("");
  el<HTMLSelectElement>("kc-select").innerHTML = detail.kc_ids
    .map((k) => `<option>${k}</option>`)
    .join("");
}

function renderPatternBox(): void {
  el("pattern-box").innerHTML = renderPattern(state.baseResponses, state.stagedFlips);
  for (const btn of el("pattern-box").querySelectorAll<HTMLButtonElement>(".item-box")) {
    btn.addEventListener("click", () => onFlip(btn.dataset.item!));
  }
}

async function showBaseDiagnosis(): Promise<void> {
  if (!state.modelId || !state.studentId) return;
  const payload = await latest("diagnose", () =>
    api.diagnose(state.modelId!, state.baseResponses),
  );
  if (!payload) return;
  state = cachePayload(state, "diagnose", payload);
  el("diagnosis").innerHTML = renderDiagnosis(payload);
}

async function onSelectStudent(studentId: string): Promise<void> {
  if (!state.datasetId || !studentId) return;
  const body = await api.studentResponses(state.datasetId, studentId);
  state = loadStudent(state, studentId, body.responses);
  el("contrastive").innerHTML = "";
  el("counterfactual").innerHTML = "";
  flash("");
  renderPatternBox();
  await showBaseDiagnosis();
}

async function onFlip(itemId: string): Promise<void> {
  state = toggleFlip(state, itemId);
  renderPatternBox();
  if (state.stagedFlips.length === 0) {
    el("contrastive").innerHTML = "";
    return;
  }
  const payload = await latest("contrastive", () =>
    api.contrastive(state.modelId!, state.baseResponses, state.stagedFlips),
  );
  if (!payload) return;
  state = cachePayload(state, "contrastive", payload);
  el("contrastive").innerHTML = renderContrastive(payload);
}

async function onApplyDisagreement(): Promise<void> {
  const kc = el<HTMLSelectElement>("kc-select").value;
  const raw = el<HTMLInputElement>("mastery-input").value;
  const check = validateMastery(raw);
  if (!check.ok) {
    flash(check.message);
    return; // invalid input never reaches the network
  }
  flash("");
  state = setOverride(state, kc, check.value);
  const payload = await latest("counterfactual", () =>
    api.counterfactual(state.modelId!, state.baseResponses, state.overrides),
  );
  if (!payload) return;
  state = cachePayload(state, "counterfactual", payload);
  el("counterfactual").innerHTML = renderCounterfactual(payload);
}

function onReset(): void {
  // restores the original response state; nothing is fetched or mutated
  state = reset(state);
  flash("");
  renderPatternBox();
  el("contrastive").innerHTML = "";
  el("counterfactual").innerHTML = "";
  const cached = state.cache.diagnose as DiagnosePayload | undefined;
  if (cached) el("diagnosis").innerHTML = renderDiagnosis(cached);
}

async function onUpload(): Promise<void> {
  const responses = el<HTMLTextAreaElement>("upload-responses").value;
  const qmatrix = el<HTMLTextAreaElement>("upload-qmatrix").value;
  try {
    const made = await api.uploadDataset(responses, qmatrix);
    flash(`uploaded ${made.dataset_id}`, false);
    await refreshCatalog();
  } catch (err) {
    flash(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
  }
}

async function onTrain(): Promise<void> {
  const datasetId = el<HTMLSelectElement>("dataset-select").value;
  if (!datasetId) {
    flash("pick a dataset to train on");
    return;
  }
  flash("training...", false);
  try {
    const made = await api.trainModel(datasetId);
    flash(`trained ${made.model_id}`, false);
    await refreshCatalog();
  } catch (err) {
    flash(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
  }
}

async function onSelectModel(modelId: string, datasetId: string): Promise<void> {
  state = selectModel(state, modelId, datasetId);
  el("diagnosis").innerHTML = "";
  el("contrastive").innerHTML = "";
  el("counterfactual").innerHTML = "";
  el("pattern-box").innerHTML = "";
  await Promise.all([renderDashboard(), populateStudents()]);
}

export function boot(): void {
  el<HTMLSelectElement>("model-select").addEventListener("change", (ev) => {
    const sel = ev.target as HTMLSelectElement;
    const opt = sel.selectedOptions[0];
    if (sel.value && opt.dataset.dataset) {
      void onSelectModel(sel.value, opt.dataset.dataset);
    }
  });
  el<HTMLSelectElement>("student-select").addEventListener("change", (ev) =>
    void onSelectStudent((ev.target as HTMLSelectElement).value),
  );
  el("apply-disagreement").addEventListener("click", () => void onApplyDisagreement());
  el("reset-view").addEventListener("click", onReset);
  el("upload-button").addEventListener("click", () => void onUpload());
  el("train-button").addEventListener("click", () => void onTrain());
  void refreshCatalog();
}

if (typeof document !== "undefined" && document.getElementById("model-select")) {
  boot();
}
