/** Payload shapes of the workbench HTTP API, as served, snake_case and all. */

export interface LlBand {
  level: number;
  lower: number;
  upper: number;
}

export interface HslReferenceRow {
  dimension: string;
  values: string[];
  note: string | null;
}

export interface AmlProtocolInfo {
  code: string;
  assess_focused_range: boolean;
  assess_aspect_group: boolean;
  consider_aspect_level: boolean;
  assess_aspect_level: boolean;
  assess_second_order: boolean;
  assess_propagation_operators: boolean;
}

export interface FocusedDimensionInfo {
  id: string;
  label: string;
  definition: string;
}

export interface ReferenceTables {
  /** Rows LL-0..LL-8, columns HSL-1..HSL-6. The only risk arithmetic the UI does. */
  risk_matrix: number[][];
  ll_bands: LlBand[];
  hsl_labels: Record<string, string>;
  hsl_thresholds: Record<string, number[]>;
  hsl_reference_rows: HslReferenceRow[];
  aml_protocols: AmlProtocolInfo[];
  focused_scheme: { name: string; dimensions: FocusedDimensionInfo[] };
}

export interface RationaleDoc {
  key_assumptions: string;
  evidence_quality: string;
  known_uncertainties: string;
  sensitivity_notes: string;
  operator_or_interaction_rationale: string | null;
}

export interface EstimateDoc {
  assessor: string;
  hsl: number;
  ll: number;
  round: "initial" | "post_recalibration";
}

export interface OutcomeDoc {
  description: string;
  estimates: EstimateDoc[];
  final: [number, number] | null;
  flagged: boolean;
}

export interface InteractionDoc {
  aspect_a: string;
  aspect_b: string;
  rationale: string;
}

export interface ScenarioDoc {
  id: string;
  aspect_ref: string;
  order: "first_order" | "second_order";
  hazard_mode: string;
  narrative: string;
  prop_enhanced: boolean;
  pathway: unknown;
  interaction: InteractionDoc | null;
  parent_scenario: string | null;
  applied_operator: string | null;
  outcomes: OutcomeDoc[];
  dimension_refs: string[];
  rationale: RationaleDoc | null;
  status: "draft" | "estimated" | "recalibrating" | "complete";
}

export interface TeamMemberDoc {
  name: string;
  role: string;
}

export interface SystemInfoDoc {
  assessment_date: string | null;
  team_composition: TeamMemberDoc[];
  assessing_organization: string;
  assessment_time_frame_years: number;
  assessment_type_code: string;
  system_name: string;
  version: string;
  access_level: string;
  generational_scope: string;
  system_level_assumptions: string;
}

export interface SessionSnapshot {
  id: string;
  system_info: SystemInfoDoc;
  aml_code: string;
  framework_version: string;
  team_mode: "single" | "team";
  divergence_thresholds: { ll_delta: number; hsl_delta: number };
  state: "configured" | "in_progress" | "finalized";
  revision: number;
  scenarios: ScenarioDoc[];
  aspect_completion: { aspect_id: string; rationale: string }[];
}

export interface SessionDocument {
  format_version: string;
  taxonomy_version: string;
  session: SessionSnapshot;
  emitted_outputs: string[];
}

export interface MutationEnvelope {
  expected_revision: number;
  command: string;
  args: Record<string, unknown>;
  actor: string;
}

export interface MutationResponse {
  result: Record<string, unknown>;
  session: SessionSnapshot;
}

export interface DivergenceFlagDoc {
  outcome_index: number;
  hsl_spread: number;
  ll_spread: number;
  message: string;
}

export interface DivergenceReport {
  scenarios: {
    scenario_id: string;
    status: string;
    flags: DivergenceFlagDoc[];
  }[];
}

export interface ReportCardDoc {
  context: Record<string, unknown>;
  rows: string[];
  row_labels: Record<string, string>;
  columns: string[];
  cells: Record<string, Record<string, number | null>>;
  total_max: number | null;
  scheme: string;
  focused: Record<string, number | null>;
  radar: [string, number | null][];
}
