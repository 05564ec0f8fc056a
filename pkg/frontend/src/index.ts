export { ApiClient, ApiError, ConflictError } from "./client";
export { buildDivergenceView } from "./divergence";
export type { AssessorColumn, DivergenceComparison } from "./divergence";
export { flowPosition } from "./flow";
export type { FlowPosition, FlowStep } from "./flow";
export { bindEstimatePicker } from "./picker";
export type { EstimatePickerModel, EstimateSelection, HslOption } from "./picker";
export { buildRadarView, makeRadarConfig } from "./radar";
export type { RadarView } from "./radar";
export * from "./types";
export { emptyView, flushPending, loadView, submitWithRetry } from "./view";
export type { MutationRequest, SessionViewState } from "./view";
