import type { FindingPayload, ModelPayload } from "../src/types.js";

export const sampleModel: ModelPayload = {
  revision: "r1",
  root: "G",
  document: {
    format: "goalmodel/v1",
    actors: [{ id: "A", name: "Actor", artefacts: ["G", "G1", "G2", "CT_1"] }],
    artefacts: [
      { id: "G", kind: "goal", name: "Primary", actor: "A", temp: false, ie: [["p"]] },
      { id: "G1", kind: "goal", name: "Left", actor: "A", temp: false, ie: [["p", "r"]] },
      { id: "G2", kind: "task", name: "Right", actor: "A", temp: false, ie: [["!r", "q"]] },
      { id: "CT_1", kind: "goal", name: "carrier", actor: "A", temp: true, ie: [["w"]] },
    ],
    decompositions: [
      { parent: "G", kind: "and", children: ["G1", "G2"] },
      { parent: "G1", kind: "or", children: ["CT_1"] },
    ],
    dependencies: [{ depender: ["A", "G2"], dependee: ["A", "CT_1"] }],
  },
  dsl: "",
  ce: {
    G: [["p", "q", "r", "!r"]],
    G1: [["p", "r"]],
    G2: [["!r", "q"]],
  },
  conflicts: ["G"],
  layout: {
    G: { depth: 0, column: 0 },
    G1: { depth: 1, column: 0 },
    G2: { depth: 1, column: 1 },
    CT_1: { depth: 2, column: 0 },
  },
  report: { findings: [], warnings: [] },
};

export const siblingFinding: FindingPayload = {
  id: "sibling:G:G1:G2:r",
  kind: "sibling",
  at: "G",
  alternatives: [],
  children: ["G1", "G2"],
  conflicting: ["r", "!r"],
  missing: [],
  availability: [],
  note: "",
  plans: [
    {
      digest: "d1",
      label: "Solution 1",
      edits: [{ op: "strip-literals", artefact: "G1", literals: ["r"] }],
    },
    {
      digest: "d2",
      label: "Solution 2",
      edits: [{ op: "strip-literals", artefact: "G2", literals: ["!r"] }],
    },
  ],
};

export const entailmentFinding: FindingPayload = {
  id: "entailment:G",
  kind: "entailment",
  at: "G",
  alternatives: [0],
  children: [],
  conflicting: [],
  missing: [[0, ["w"]]],
  availability: [[0]],
  note: "",
  plans: [
    {
      digest: "d3",
      label: "",
      edits: [
        { op: "add-temp-goal", id: "CT_1", name: "w", actor: "A", ie: [["w"]] },
        { op: "add-and-link", parent: "G", child: "CT_1" },
      ],
    },
  ],
};
