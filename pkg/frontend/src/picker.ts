import type { LlBand, ReferenceTables } from "./types";

export interface EstimateSelection {
  hsl: number;
  ll: number;
}

export interface HslOption {
  level: number;
  label: string;
  /** One anchor string per reference dimension, for the guidance pane. */
  referenceAnchors: string[];
}

export interface EstimatePickerModel {
  /** False until the reference tables have loaded. */
  enabled: boolean;
  hslOptions: HslOption[];
  llOptions: LlBand[];
  selection: EstimateSelection | null;
  /** Risk level for the selected pair, straight from the server matrix. */
  preview: number | null;
  submitEnabled: boolean;
  rubricText: string | null;
}

const DISABLED: EstimatePickerModel = {
  enabled: false,
  hslOptions: [],
  llOptions: [],
  selection: null,
  preview: null,
  submitEnabled: false,
  rubricText: null,
};

/**
 * Bind the severity/likelihood picker to the server's reference tables.
 * The preview is a lookup into the served risk matrix; the UI does no
 * other risk arithmetic.
 */
export function bindEstimatePicker(
  tables: ReferenceTables | null,
  selection: EstimateSelection | null,
  rubricText: string | null = null,
): EstimatePickerModel {
  if (tables === null) {
    return DISABLED;
  }
  const hslOptions: HslOption[] = Object.entries(tables.hsl_labels)
    .map(([level, label]) => ({
      level: Number(level),
      label,
      referenceAnchors: tables.hsl_reference_rows.map(
        (row) => `${row.dimension}: ${row.values[Number(level) - 1]}`,
      ),
    }))
    .sort((a, b) => a.level - b.level);
  let preview: number | null = null;
  if (selection !== null) {
    const row = tables.risk_matrix[selection.ll];
    if (row === undefined || selection.hsl < 1 || selection.hsl > row.length) {
      throw new RangeError(
        `no matrix cell for HSL-${selection.hsl} / LL-${selection.ll}`,
      );
    }
    preview = row[selection.hsl - 1];
  }
  return {
    enabled: true,
    hslOptions,
    llOptions: tables.ll_bands,
    selection,
    preview,
    submitEnabled: selection !== null,
    rubricText,
  };
}
