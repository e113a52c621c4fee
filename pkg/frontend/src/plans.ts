import type { EditPayload, FindingPayload, PlanPayload } from "./types.js";

// Side-by-side comparison panes for a finding's candidate plans. Sibling
// conflicts always come back with two alternatives to choose between.

export type PlanPane = {
  digest: string;
  label: string;
  edits: EditPayload[];
  summary: string[];
};

export function editSummary(edit: EditPayload): string {
  switch (edit.op) {
    case "add-temp-goal":
      return `add goal ${edit.id} "${edit.name}" carrying ${formatIe(edit.ie as string[][])}`;
    case "add-and-link":
      return `link ${edit.child} under ${edit.parent}`;
    case "add-parent":
      return `wrap ${edit.child} with ${edit.wrapper} under ${edit.under}`;
    case "strip-literals":
      return `strip ${(edit.literals as string[]).join(", ")} from ${edit.artefact}`;
    default:
      return JSON.stringify(edit);
  }
}

function formatIe(ie: string[][]): string {
  return ie.map((alt) => `{${alt.join(", ")}}`).join(" | ");
}

export function comparePanes(finding: FindingPayload): PlanPane[] {
  return finding.plans.map((plan: PlanPayload, index: number) => ({
    digest: plan.digest,
    label: plan.label || `Plan ${index + 1}`,
    edits: plan.edits,
    summary: plan.edits.map(editSummary),
  }));
}

export function findingHeadline(finding: Omit<FindingPayload, "plans">): string {
  switch (finding.kind) {
    case "entailment": {
      const missing = finding.missing
        .filter(([, literals]) => literals.length > 0)
        .map(([index, literals]) => `alt ${index + 1} misses {${literals.join(", ")}}`);
      return `entailment at ${finding.at}: ${missing.join("; ") || "conditions unmet"}`;
    }
    case "hierarchic":
      return (
        `${finding.note === "dependency" ? "dependency" : "hierarchic"} conflict at ` +
        `${finding.at}: {${finding.conflicting.join(", ")}} from ${finding.children.join(", ")}`
      );
    case "sibling":
      return `sibling conflict at ${finding.at}: ${finding.children.join(" vs ")}`;
  }
}
