import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { ReferenceTables, ReportCardDoc, SessionDocument } from "../src/types";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function loadJson(name: string): unknown {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8"));
}

export function referenceTables(): ReferenceTables {
  return loadJson("reference_tables.json") as ReferenceTables;
}

export function sessionAml010(): SessionDocument {
  return loadJson("session_aml010.json") as SessionDocument;
}

export function gatingDetail(): string {
  return (loadJson("gating_error.json") as { detail: string }).detail;
}

export function reportCard(): ReportCardDoc {
  return loadJson("report_card.json") as ReportCardDoc;
}

export function reportCardAllZero(): ReportCardDoc {
  return loadJson("report_card_zero.json") as ReportCardDoc;
}
