/**
 * Typed client for the temai evaluation service.
 *
 * Every number the workbench displays originates from these payloads; the
 * client never recomputes stage values locally.
 */

export interface ApiError {
  code: string;
  message: string;
  field_path: string | null;
}

export interface StageScores {
  capability_score: number;
  adoption_rate: number;
  effective_capability: number;
  utility_rate: number;
  final_value: number;
  mode: string;
  final_value_appendix: number;
  final_value_reported: number;
}

/** Server-side canonical formatting: 2 decimals for scores, 4 for rates. */
export interface StageDisplay {
  capability_score: string;
  adoption_rate: string;
  effective_capability: string;
  utility_rate: string;
  final_value: string;
  mode: string;
  final_value_appendix: string;
  final_value_reported: string;
}

export interface ConvertedScore {
  criterion: string;
  stage: string;
  raw_level_score: number;
  converted: number;
}

export interface PipelineResponse {
  assessment_id: string;
  version: number;
  mode: string;
  stage_scores: StageScores;
  display: StageDisplay;
  converted_scores: {
    capability: ConvertedScore[];
    adoption: ConvertedScore[];
    utility: ConvertedScore[];
  };
}

export interface MarginalDelta {
  criterion: string;
  old_level: number;
  new_level: number;
  stage: string;
  stage_delta: number;
  final_value_delta: number;
}

export interface WhatIfResponse {
  assessment_id: string;
  mode: string;
  before: StageScores;
  after: StageScores;
  combined_final_delta: number;
  marginals: MarginalDelta[];
  display: { before: StageDisplay; after: StageDisplay };
}

export interface Concordance {
  w: number;
  n_items: number;
  n_experts: number;
  tie_corrected: boolean;
  consensus_reached: boolean;
  threshold: number;
}

export interface RoundSummary {
  round: number;
  concordance: Concordance;
  aggregate_ranking: string[];
  mean_ranks: Record<string, number>;
  further_round_required: boolean;
  warnings: string[];
}

export interface Stability {
  round_a: number;
  round_b: number;
  mean_rank_shift: number;
  max_rank_shift: number;
  stable: boolean;
  bound: number;
}

export interface RoundResponse {
  summary: RoundSummary;
  stability?: Stability;
}

export interface RoundsListing {
  study_id: string;
  rounds: RoundSummary[];
  stability: Stability[];
  consensus_reached: boolean;
}

export interface QuadrantCell {
  quadrant: string;
  regulatory: "high" | "low";
  support: "high" | "low";
  strategy_note: string;
  thresholds: { regulatory: number; support: number };
}

export interface QuadrantResponse {
  position: {
    regulatory_intensity: number;
    support_level: number;
    quadrant: string;
    strategy_note: string;
  };
  grid: QuadrantCell[];
}

export interface FrameworkCriterion {
  id: string;
  component: string;
  display_name: string;
  aliases: Record<string, string>;
}

export interface FrameworkDoc {
  framework_id: string;
  display_name: string;
  dimensions: { id: string; display_name: string }[];
  components: { id: string; dimension: string; display_name: string }[];
  criteria: FrameworkCriterion[];
}

export interface FrameworkResponse {
  framework: FrameworkDoc;
  validation: Record<string, unknown>;
}

export interface AssessmentDoc {
  assessment_id: string;
  framework_id: string;
  weight_table: string;
  created_at: string;
  version: number;
  ratings: Record<string, number>;
  provenance: Record<string, string>;
}

export interface AssessmentResponse {
  assessment: AssessmentDoc;
  version: number;
}

export class ApiRequestError extends Error {
  constructor(readonly status: number, readonly body: ApiError) {
    super(body.message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class TemaiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, {
      ...init,
      headers: { "Content-Type": "application/json", ...(init?.headers ?? {}) },
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiRequestError(response.status, payload as ApiError);
    }
    return payload as T;
  }

  getFramework(id = "temai"): Promise<FrameworkResponse> {
    return this.request(`/frameworks/${id}`);
  }

  getAssessment(id: string, version?: number): Promise<AssessmentResponse> {
    const query = version === undefined ? "" : `?version=${version}`;
    return this.request(`/assessments/${id}${query}`);
  }

  createAssessment(body: {
    assessment_id: string;
    weight_table: string;
    ratings: Record<string, number>;
    created_at?: string;
    request_id?: string;
  }): Promise<AssessmentResponse> {
    return this.request(`/assessments`, { method: "POST", body: JSON.stringify(body) });
  }

  runPipeline(id: string, mode: string, version?: number): Promise<PipelineResponse> {
    const versionPart = version === undefined ? "" : `&version=${version}`;
    return this.request(`/assessments/${id}/pipeline?mode=${mode}${versionPart}`, {
      method: "POST",
    });
  }

  runWhatIf(
    id: string,
    interventions: { criterion: string; level: number }[],
    mode: string,
  ): Promise<WhatIfResponse> {
    return this.request(`/assessments/${id}/whatif`, {
      method: "POST",
      body: JSON.stringify({ interventions, mode }),
    });
  }

  postRound(
    studyId: string,
    submissions: { expert_id: string; rankings?: Record<string, number>; ratings?: Record<string, number> }[],
    requestId?: string,
  ): Promise<RoundResponse> {
    return this.request(`/studies/${studyId}/rounds`, {
      method: "POST",
      body: JSON.stringify({ submissions, request_id: requestId }),
    });
  }

  getRounds(studyId: string): Promise<RoundsListing> {
    return this.request(`/studies/${studyId}/rounds`);
  }

  getQuadrant(regulatory: number, support: number): Promise<QuadrantResponse> {
    return this.request(`/quadrant?regulatory=${regulatory}&support=${support}`);
  }
}
