/**
 * Session view state. The invariant maintained throughout: displayed stage
 * numbers always originate from API responses, never from client-side
 * arithmetic; this object only stores the last responses.
 */

import type { PipelineResponse, WhatIfResponse } from "./api.js";

export type Mode = "reported" | "appendix";

export const MODE_EXPLANATION =
  "reported: adoption rate applied twice (matches the bundled case-study " +
  "finals) · appendix: strict chain, adoption rate applied once — " +
  "reported = appendix × adoption rate";

export interface Intervention {
  criterion: string;
  level: number;
}

export interface SessionViewState {
  activeStudy: string;
  assessmentId: string | null;
  /** version the current form was loaded from; used to detect conflicts */
  loadedVersion: number | null;
  weightTable: string;
  mode: Mode;
  pendingInterventions: Intervention[];
  lastPipeline: PipelineResponse | null;
  lastWhatIf: WhatIfResponse | null;
  /** a concurrent writer bumped the version: prompt a reload */
  conflict: boolean;
}

export function initialState(): SessionViewState {
  return {
    activeStudy: "workbench",
    assessmentId: null,
    loadedVersion: null,
    weightTable: "store",
    mode: "reported",
    pendingInterventions: [],
    lastPipeline: null,
    lastWhatIf: null,
    conflict: false,
  };
}

export function setIntervention(
  state: SessionViewState,
  criterion: string,
  level: number,
): SessionViewState {
  const rest = state.pendingInterventions.filter((iv) => iv.criterion !== criterion);
  return { ...state, pendingInterventions: [...rest, { criterion, level }] };
}

export function resetInterventions(state: SessionViewState): SessionViewState {
  return { ...state, pendingInterventions: [], lastWhatIf: null };
}

/**
 * Optimistic-concurrency check after "apply as new version": the server
 * assigns versions monotonically, so anything other than loaded+1 means a
 * conflicting write landed first.
 */
export function afterApply(
  state: SessionViewState,
  newVersion: number,
): SessionViewState {
  const expected = (state.loadedVersion ?? 0) + 1;
  if (newVersion !== expected) {
    return { ...state, conflict: true };
  }
  return {
    ...state,
    loadedVersion: newVersion,
    pendingInterventions: [],
    lastWhatIf: null,
  };
}
