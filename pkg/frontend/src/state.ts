import { AnalysisApi } from "./api.js";
import { buildGraph, type GraphView } from "./graph.js";
import { comparePanes, type PlanPane } from "./plans.js";
import type { FindingPayload, FindingsPayload, ModelPayload } from "./types.js";

// Per-tab view state for one analysis session. All mutations flow through
// applySelected(); every displayed value comes from a service payload.

export type StaleNotice = { kind: "stale"; message: string } | null;

export class AnalystSession {
  private findingsPayload: FindingsPayload | null = null;
  private modelPayload: ModelPayload | null = null;
  private selectedFindingId: string | null = null;
  notice: StaleNotice = null;

  constructor(
    private readonly api: AnalysisApi,
    readonly sessionId: string,
  ) {}

  get revision(): string {
    return this.findingsPayload?.revision ?? "";
  }

  get findings(): FindingPayload[] {
    return this.findingsPayload?.findings ?? [];
  }

  get model(): ModelPayload | null {
    return this.modelPayload;
  }

  get graph(): GraphView | null {
    return this.modelPayload ? buildGraph(this.modelPayload) : null;
  }

  get selectedFinding(): FindingPayload | null {
    if (this.selectedFindingId === null) return null;
    return this.findings.find((f) => f.id === this.selectedFindingId) ?? null;
  }

  async refresh(): Promise<void> {
    this.findingsPayload = await this.api.findings(this.sessionId);
    this.modelPayload = await this.api.model(this.sessionId, this.findingsPayload.revision);
    if (
      this.selectedFindingId !== null &&
      !this.findings.some((f) => f.id === this.selectedFindingId)
    ) {
      this.selectedFindingId = null; // the finding belonged to an older revision
    }
  }

  selectFinding(findingId: string | null): void {
    if (findingId !== null && !this.findings.some((f) => f.id === findingId)) {
      throw new Error(`finding ${findingId} is not part of revision ${this.revision}`);
    }
    this.selectedFindingId = findingId;
  }

  panes(): PlanPane[] {
    const finding = this.selectedFinding;
    return finding ? comparePanes(finding) : [];
  }

  // Applies one of the selected finding's plans, then refreshes. A 409 from
  // the service surfaces as a reload notice and leaves state untouched.
  async applySelected(digest: string): Promise<boolean> {
    const finding = this.selectedFinding;
    if (!finding) {
      throw new Error("no finding selected");
    }
    if (!finding.plans.some((p) => p.digest === digest)) {
      throw new Error("digest does not belong to the selected finding's plans");
    }
    const result = await this.api.apply(this.sessionId, finding.id, digest);
    if (result.status === 200) {
      this.notice = null;
      await this.refresh();
      return true;
    }
    if (result.status === 409) {
      this.notice = {
        kind: "stale",
        message: "The model changed elsewhere; reload to see fresh findings.",
      };
      return false;
    }
    throw new Error(result.error);
  }

  async reload(): Promise<void> {
    this.notice = null;
    this.selectedFindingId = null;
    await this.refresh();
  }
}

export async function openSession(
  api: AnalysisApi,
  model: string,
  kb = "",
  root?: string,
): Promise<AnalystSession> {
  const created = await api.createSession(model, kb, root);
  const session = new AnalystSession(api, created.session);
  await session.refresh();
  return session;
}
