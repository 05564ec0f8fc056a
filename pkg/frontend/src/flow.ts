import type { SessionSnapshot } from "./types";

export type FlowStep =
  | "scenarios"
  | "estimates"
  | "recalibration"
  | "aspect-review"
  | "finalize"
  | "report";

export interface FlowPosition {
  step: FlowStep;
  /** Human-readable reasons the session cannot move past this step yet. */
  blockers: string[];
}

/**
 * Where the assessment stands, derived purely from the snapshot. The
 * wizard highlights this step; earlier steps stay reachable for edits.
 */
export function flowPosition(
  session: SessionSnapshot,
  pendingAspects: string[],
): FlowPosition {
  if (session.state === "finalized") {
    return { step: "report", blockers: [] };
  }
  if (session.scenarios.length === 0) {
    return { step: "scenarios", blockers: ["no scenarios recorded yet"] };
  }
  const drafts = session.scenarios.filter((s) => s.status === "draft");
  if (drafts.length > 0) {
    return {
      step: "estimates",
      blockers: drafts.map((s) => `scenario ${s.id} is missing estimates`),
    };
  }
  const unresolved = session.scenarios.filter(
    (s) => s.status === "estimated" || s.status === "recalibrating",
  );
  if (unresolved.length > 0) {
    return {
      step: "recalibration",
      blockers: unresolved.map((s) => `scenario ${s.id} is ${s.status}`),
    };
  }
  if (pendingAspects.length > 0) {
    return {
      step: "aspect-review",
      blockers: pendingAspects.map((id) => `aspect ${id} not yet complete`),
    };
  }
  return { step: "finalize", blockers: [] };
}
