/**
 * Rating entry view: one level input per criterion grouped by dimension,
 * pre-conversion bars for the entered levels, and the stage header
 * (capability → effective → final) taken verbatim from the last pipeline
 * response.
 */

import type { FrameworkDoc, PipelineResponse } from "./api.js";
import { MODE_EXPLANATION } from "./state.js";
import { checkCompleteness, type CompletenessReport } from "./validation.js";

export interface RatingEntryViewModel {
  /** rows grouped per dimension in framework order */
  groups: {
    dimension: string;
    label: string;
    rows: { criterion: string; label: string; level: number | null; preScore: number | null }[];
  }[];
  completeness: CompletenessReport;
  submitEnabled: boolean;
  /** header strings straight from the API display payload, or null before
   * the first scoring round-trip */
  header: { capability: string; effective: string; final: string; mode: string } | null;
  modeExplanation: string;
}

export function ratingEntryViewModel(
  framework: FrameworkDoc,
  ratings: Record<string, number | null>,
  pipeline: PipelineResponse | null,
): RatingEntryViewModel {
  const dimensionOf: Record<string, string> = {};
  for (const component of framework.components) {
    dimensionOf[component.id] = component.dimension;
  }
  const groups = framework.dimensions.map((dimension) => ({
    dimension: dimension.id,
    label: dimension.display_name,
    rows: framework.criteria
      .filter((criterion) => dimensionOf[criterion.component] === dimension.id)
      .map((criterion) => {
        const level = ratings[criterion.id] ?? null;
        return {
          criterion: criterion.id,
          label: criterion.display_name,
          level,
          // pre-conversion display of the user's own entry (20 points per level)
          preScore: level === null ? null : 20 * level,
        };
      }),
  }));
  const completeness = checkCompleteness(framework, ratings);
  return {
    groups,
    completeness,
    submitEnabled: completeness.complete,
    header:
      pipeline === null
        ? null
        : {
            capability: pipeline.display.capability_score,
            effective: pipeline.display.effective_capability,
            final: pipeline.display.final_value,
            mode: pipeline.display.mode,
          },
    modeExplanation: MODE_EXPLANATION,
  };
}

export function renderRatingEntry(vm: RatingEntryViewModel): string {
  const header =
    vm.header === null
      ? `<div class="stage-header" data-empty>enter all levels and score to see the chain</div>`
      : `<div class="stage-header">` +
        `<span class="stage" data-stage="capability">${vm.header.capability}</span>` +
        ` <span class="arrow">→</span> ` +
        `<span class="stage" data-stage="effective">${vm.header.effective}</span>` +
        ` <span class="arrow">→</span> ` +
        `<span class="stage" data-stage="final">${vm.header.final}</span>` +
        ` <span class="mode-badge">${vm.header.mode}</span>` +
        `</div>`;
  const groups = vm.groups
    .map((group) => {
      const rows = group.rows
        .map((row) => {
          const bar =
            row.preScore === null
              ? ""
              : `<div class="bar" style="width:${row.preScore}%" data-prescore="${row.preScore}"></div>`;
          return (
            `<div class="criterion-row" data-criterion="${row.criterion}">` +
            `<label>${row.label}</label>` +
            `<input type="number" min="1" max="5" step="1" value="${row.level ?? ""}" ` +
            `data-level-input="${row.criterion}">` +
            bar +
            `</div>`
          );
        })
        .join("");
      return `<section class="dimension" data-dimension="${group.dimension}"><h3>${group.label}</h3>${rows}</section>`;
    })
    .join("");
  const missing =
    vm.completeness.complete
      ? ""
      : `<div class="missing">missing: ${vm.completeness.missing.join(", ")}` +
        (vm.completeness.invalid.length
          ? ` · invalid: ${vm.completeness.invalid.join(", ")}`
          : "") +
        `</div>`;
  const submit = `<button data-action="score" ${vm.submitEnabled ? "" : "disabled"}>score</button>`;
  const modeNote = `<p class="mode-note">${vm.modeExplanation}</p>`;
  return header + modeNote + groups + missing + submit;
}
