// Payload shapes of the analysis service. The UI treats every field as
// opaque display data: no reconciliation happens on the client.

export type EditPayload = {
  op: "add-temp-goal" | "add-and-link" | "add-parent" | "strip-literals";
  [key: string]: unknown;
};

export type PlanPayload = {
  digest: string;
  label: string;
  edits: EditPayload[];
};

export type FindingPayload = {
  id: string;
  kind: "entailment" | "hierarchic" | "sibling";
  at: string;
  alternatives: number[];
  children: string[];
  conflicting: string[];
  missing: [number, string[]][];
  availability: number[][];
  note: string;
  plans: PlanPayload[];
};

export type FindingsPayload = {
  revision: string;
  findings: FindingPayload[];
  warnings: string[];
};

export type ArtefactDoc = {
  id: string;
  kind: "goal" | "task" | "resource";
  name: string;
  actor: string;
  temp: boolean;
  ie: string[][];
};

export type DecompositionDoc = {
  parent: string;
  kind: "and" | "or";
  children: string[];
};

export type DependencyDoc = {
  depender: [string, string];
  dependee: [string, string];
};

export type ModelDocument = {
  format: string;
  actors: { id: string; name: string; artefacts: string[] }[];
  artefacts: ArtefactDoc[];
  decompositions: DecompositionDoc[];
  dependencies: DependencyDoc[];
};

export type ReportPayload = {
  findings: Omit<FindingPayload, "plans">[];
  warnings: string[];
};

export type ModelPayload = {
  revision: string;
  root: string;
  document: ModelDocument;
  dsl: string;
  ce: Record<string, string[][]>;
  conflicts: string[];
  layout: Record<string, { depth: number; column: number }>;
  report: ReportPayload;
};

export type SessionCreated = {
  session: string;
  revision: string;
  root: string;
  report: ReportPayload;
};

export type ApplyResult =
  | { status: 200; revision: string; report: ReportPayload }
  | { status: 409; error: string }
  | { status: 404; error: string };

export type HistoryEntry = {
  revision: string;
  applied: string | null;
  finding: string | null;
};
