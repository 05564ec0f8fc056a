import type {
  DivergenceReport,
  RationaleDoc,
  ReferenceTables,
  SessionSnapshot,
} from "./types";

/** One assessor's column in the side-by-side comparison. */
export interface AssessorColumn {
  assessor: string;
  hsl: number;
  ll: number;
  /** Risk level from the served matrix, for display only. */
  riskLevel: number;
}

export interface DivergenceComparison {
  scenarioId: string;
  outcomeIndex: number;
  outcomeDescription: string;
  message: string;
  hslSpread: number;
  llSpread: number;
  columns: AssessorColumn[];
  /** The scenario's stated assumptions, shown alongside the estimates. */
  rationale: RationaleDoc | null;
}

/**
 * Pair each divergence flag with the estimates behind it so assessors
 * can compare their underlying assumptions before recalibrating.
 * Columns follow team order.
 */
export function buildDivergenceView(
  session: SessionSnapshot,
  report: DivergenceReport,
  tables: ReferenceTables,
): DivergenceComparison[] {
  const teamOrder = session.system_info.team_composition.map((m) => m.name);
  const comparisons: DivergenceComparison[] = [];
  for (const entry of report.scenarios) {
    const scenario = session.scenarios.find((s) => s.id === entry.scenario_id);
    if (scenario === undefined) {
      throw new Error(`divergence report names unknown scenario ${entry.scenario_id}`);
    }
    for (const flag of entry.flags) {
      const outcome = scenario.outcomes[flag.outcome_index];
      const columns = outcome.estimates
        .filter((estimate) => estimate.round === "initial")
        .map((estimate) => ({
          assessor: estimate.assessor,
          hsl: estimate.hsl,
          ll: estimate.ll,
          riskLevel: tables.risk_matrix[estimate.ll][estimate.hsl - 1],
        }))
        .sort(
          (a, b) => teamOrder.indexOf(a.assessor) - teamOrder.indexOf(b.assessor),
        );
      comparisons.push({
        scenarioId: scenario.id,
        outcomeIndex: flag.outcome_index,
        outcomeDescription: outcome.description,
        message: flag.message,
        hslSpread: flag.hsl_spread,
        llSpread: flag.ll_spread,
        columns,
        rationale: scenario.rationale,
      });
    }
  }
  return comparisons;
}
