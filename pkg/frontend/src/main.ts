/**
 * Workbench wiring: fetch → view models → DOM. All stage numbers rendered
 * anywhere on the page come from API responses held in SessionViewState.
 */

import { ApiRequestError, TemaiClient, type FrameworkDoc } from "./api.js";
import { renderGauge, gaugeViewModel, renderQuadrantChart, renderRoundTable, renderStabilityBadge, quadrantViewModel } from "./delphiConsole.js";
import { ratingEntryViewModel, renderRatingEntry } from "./ratingEntry.js";
import {
  afterApply,
  initialState,
  resetInterventions,
  setIntervention,
  type Mode,
  type SessionViewState,
} from "./state.js";
import { parseLevelInput } from "./validation.js";
import { renderWhatIfPanel, whatIfViewModel } from "./whatIfPanel.js";

const client = new TemaiClient("");

let state: SessionViewState = initialState();
let framework: FrameworkDoc | null = null;
let ratings: Record<string, number | null> = {};

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing container #${id}`);
  return node;
}

function showError(error: unknown): void {
  const box = el("errors");
  if (error instanceof ApiRequestError) {
    const field = error.body.field_path ? ` (${error.body.field_path})` : "";
    box.textContent = `${error.body.code}: ${error.body.message}${field}`;
  } else {
    box.textContent = String(error);
  }
}

function clearError(): void {
  el("errors").textContent = "";
}

function redrawRatingEntry(): void {
  if (!framework) return;
  const vm = ratingEntryViewModel(framework, ratings, state.lastPipeline);
  el("rating-entry").innerHTML = renderRatingEntry(vm);
  for (const input of el("rating-entry").querySelectorAll<HTMLInputElement>("[data-level-input]")) {
    input.addEventListener("change", () => {
      const criterion = input.dataset.levelInput!;
      const level = parseLevelInput(input.value);
      if (level === null && input.value.trim() !== "") {
        input.value = ""; // reject out-of-range keystrokes client-side
      }
      ratings[criterion] = level;
      redrawRatingEntry();
    });
  }
  el("rating-entry")
    .querySelector("[data-action=score]")
    ?.addEventListener("click", () => void scoreCurrent());
}

async function scoreCurrent(): Promise<void> {
  const assessmentId = state.assessmentId;
  if (!framework || !assessmentId) return;
  clearError();
  try {
    const complete = Object.fromEntries(
      Object.entries(ratings).filter(([, level]) => level !== null),
    ) as Record<string, number>;
    const saved = await client.createAssessment({
      assessment_id: assessmentId,
      weight_table: state.weightTable,
      ratings: complete,
    });
    state = { ...state, loadedVersion: saved.version };
    state = { ...state, lastPipeline: await client.runPipeline(assessmentId, state.mode) };
    redrawRatingEntry();
  } catch (error) {
    showError(error);
  }
}

function redrawWhatIf(): void {
  const vm = whatIfViewModel(state.pendingInterventions, state.lastWhatIf);
  el("whatif-panel").innerHTML = renderWhatIfPanel(vm);
  el("whatif-panel")
    .querySelector("[data-action=reset]")
    ?.addEventListener("click", () => {
      state = resetInterventions(state);
      redrawWhatIf();
    });
  el("whatif-panel")
    .querySelector("[data-action=apply-version]")
    ?.addEventListener("click", () => void applyInterventions());
}

async function runWhatIf(): Promise<void> {
  const assessmentId = state.assessmentId;
  if (!assessmentId || state.pendingInterventions.length === 0) return;
  clearError();
  try {
    state = {
      ...state,
      lastWhatIf: await client.runWhatIf(assessmentId, state.pendingInterventions, state.mode),
    };
    redrawWhatIf();
  } catch (error) {
    showError(error);
  }
}

async function applyInterventions(): Promise<void> {
  const assessmentId = state.assessmentId;
  if (!assessmentId || !framework) return;
  clearError();
  try {
    const current = await client.getAssessment(assessmentId);
    const merged = { ...current.assessment.ratings };
    for (const intervention of state.pendingInterventions) {
      merged[intervention.criterion] = intervention.level;
    }
    const saved = await client.createAssessment({
      assessment_id: assessmentId,
      weight_table: state.weightTable,
      ratings: merged,
    });
    state = afterApply(state, saved.version);
    if (state.conflict) {
      el("errors").textContent =
        "another session updated this assessment; reload to continue from the latest version";
      return;
    }
    ratings = { ...merged };
    state = { ...state, lastPipeline: await client.runPipeline(assessmentId, state.mode) };
    redrawRatingEntry();
    redrawWhatIf();
  } catch (error) {
    showError(error);
  }
}

function bindSliderEvents(): void {
  el("whatif-sliders").addEventListener("change", (event) => {
    const target = event.target as HTMLInputElement;
    if (!target.dataset.slider) return;
    state = setIntervention(state, target.dataset.slider, Number(target.value));
    void runWhatIf();
  });
}

function drawSliders(): void {
  if (!framework) return;
  el("whatif-sliders").innerHTML = framework.criteria
    .map(
      (criterion) =>
        `<div class="slider-row"><label>${criterion.display_name}</label>` +
        `<input type="range" min="1" max="5" step="1" ` +
        `value="${ratings[criterion.id] ?? 3}" data-slider="${criterion.id}"></div>`,
    )
    .join("");
}

async function refreshDelphi(): Promise<void> {
  try {
    const listing = await client.getRounds(state.activeStudy);
    el("round-table").innerHTML = renderRoundTable(listing);
    const last = listing.rounds[listing.rounds.length - 1];
    el("w-gauge").innerHTML = last ? renderGauge(gaugeViewModel(last)) : "";
    const lastStability = listing.stability[listing.stability.length - 1] ?? null;
    el("stability").innerHTML = renderStabilityBadge(lastStability);
  } catch (error) {
    showError(error);
  }
}

async function refreshQuadrant(regulatory: number, support: number): Promise<void> {
  try {
    const response = await client.getQuadrant(regulatory, support);
    el("quadrant").innerHTML = renderQuadrantChart(quadrantViewModel(response));
  } catch (error) {
    showError(error);
  }
}

async function boot(): Promise<void> {
  const frameworkResponse = await client.getFramework();
  framework = frameworkResponse.framework;
  state = { ...state, assessmentId: "retail-baseline" };
  const current = await client.getAssessment("retail-baseline");
  ratings = { ...current.assessment.ratings };
  state = { ...state, loadedVersion: current.version };
  state = { ...state, lastPipeline: await client.runPipeline("retail-baseline", state.mode) };

  redrawRatingEntry();
  drawSliders();
  bindSliderEvents();
  redrawWhatIf();
  await refreshDelphi();
  await refreshQuadrant(80, 20);

  el("mode-toggle").addEventListener("change", (event) => {
    state = { ...state, mode: (event.target as HTMLSelectElement).value as Mode };
    void scoreCurrent();
    void runWhatIf();
  });
}

if (typeof document !== "undefined" && document.getElementById("rating-entry")) {
  void boot().catch(showError);
}
