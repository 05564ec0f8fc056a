import type { ChartConfiguration } from "chart.js";

import type { ReportCardDoc } from "./types";

/**
 * Drawable series for the focused-aggregation radar. Axis order is the
 * scheme order the server rendered into the card. An unassessed dimension
 * is a gap (null), which is not the same thing as an assessed risk of 0.
 */
export interface RadarView {
  axes: string[];
  values: (number | null)[];
  /** True when every dimension was assessed at risk level 0. */
  closedZero: boolean;
}

export function buildRadarView(card: ReportCardDoc): RadarView {
  const axes = card.radar.map(([label]) => label);
  const values = card.radar.map(([, value]) => value);
  const closedZero =
    values.length > 0 && values.every((value) => value === 0);
  return { axes, values, closedZero };
}

/**
 * Chart configuration for the radar view. Gaps stay gaps (`spanGaps`
 * off), so an unassessed axis visibly breaks the polygon while an
 * all-zero assessment draws a closed polygon at the origin ring.
 */
export function makeRadarConfig(
  view: RadarView,
  label = "Risk level",
): ChartConfiguration<"radar"> {
  return {
    type: "radar",
    data: {
      labels: view.axes,
      datasets: [
        {
          label,
          data: view.values,
          fill: true,
          spanGaps: false,
          backgroundColor: "rgba(54,162,235,0.2)",
          borderColor: "rgb(54,162,235)",
        },
      ],
    },
    options: {
      responsive: false,
      animation: false,
      scales: {
        r: { min: 0, max: 9, ticks: { stepSize: 1 } },
      },
    },
  };
}
