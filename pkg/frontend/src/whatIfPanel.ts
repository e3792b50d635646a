/**
 * What-if panel: one slider per criterion, the live marginal-delta ranking
 * from the server, the combined result, and the "apply as new version"
 * action. Deltas shown are exactly the server's numbers; stacking two
 * interventions is labeled as a recomputation because stage conversion
 * makes combined effects non-additive.
 */

import type { WhatIfResponse } from "./api.js";
import type { Intervention } from "./state.js";

export const STACKING_NOTE =
  "combined result is a full server recomputation, not the sum of the marginals";

export interface WhatIfRow {
  criterion: string;
  fromLevel: number;
  toLevel: number;
  /** formatted straight from the server's marginal value */
  finalDelta: string;
  stage: string;
}

export interface WhatIfViewModel {
  pending: Intervention[];
  rows: WhatIfRow[];
  beforeFinal: string | null;
  afterFinal: string | null;
  combinedDelta: string | null;
  stackingNote: string | null;
  applyEnabled: boolean;
}

/** Fixed-width rendering of a server-supplied delta; no arithmetic beyond
 * formatting the number the API returned. */
export function formatDelta(value: number): string {
  return (value >= 0 ? "+" : "") + value.toFixed(4);
}

export function whatIfViewModel(
  pending: Intervention[],
  response: WhatIfResponse | null,
): WhatIfViewModel {
  if (response === null) {
    return {
      pending,
      rows: [],
      beforeFinal: null,
      afterFinal: null,
      combinedDelta: null,
      stackingNote: null,
      applyEnabled: false,
    };
  }
  const rows = response.marginals.map((marginal) => ({
    criterion: marginal.criterion,
    fromLevel: marginal.old_level,
    toLevel: marginal.new_level,
    finalDelta: formatDelta(marginal.final_value_delta),
    stage: marginal.stage,
  }));
  return {
    pending,
    rows,
    beforeFinal: response.display.before.final_value,
    afterFinal: response.display.after.final_value,
    combinedDelta: formatDelta(response.combined_final_delta),
    stackingNote: response.marginals.length > 1 ? STACKING_NOTE : null,
    applyEnabled: response.marginals.length > 0,
  };
}

export function renderWhatIfPanel(vm: WhatIfViewModel): string {
  if (vm.rows.length === 0 && vm.combinedDelta === null) {
    return `<div class="whatif-empty">drag a slider to explore interventions</div>`;
  }
  const ranking = vm.rows
    .map(
      (row) =>
        `<li data-criterion="${row.criterion}">` +
        `${row.criterion}: L${row.fromLevel} → L${row.toLevel} ` +
        `<span class="delta" data-delta="${row.finalDelta}">${row.finalDelta}</span>` +
        ` <span class="stage-tag">${row.stage}</span></li>`,
    )
    .join("");
  const note = vm.stackingNote ? `<p class="stacking-note">${vm.stackingNote}</p>` : "";
  return (
    `<div class="whatif-summary">final ${vm.beforeFinal} → ${vm.afterFinal} ` +
    `(<span data-combined-delta>${vm.combinedDelta}</span>)</div>` +
    `<ol class="marginal-ranking">${ranking}</ol>` +
    note +
    `<button data-action="apply-version" ${vm.applyEnabled ? "" : "disabled"}>apply as new version</button>` +
    `<button data-action="reset">reset</button>`
  );
}
