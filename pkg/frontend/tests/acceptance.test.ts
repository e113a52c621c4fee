// Analyst-loop acceptance against the real analysis service.

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { AnalysisApi } from "../src/api.js";
import { openSession } from "../src/state.js";
import { fixture, startService, type LiveService } from "./service.js";

let service: LiveService;
let api: AnalysisApi;

beforeAll(async () => {
  service = await startService();
  api = new AnalysisApi(service.base);
}, 30_000);

afterAll(() => {
  service?.stop();
});

describe("B1: healthcare analyst loop", () => {
  it("drives two findings to zero with two clicks, showing only service values", async () => {
    const session = await openSession(
      api,
      fixture("healthcare_changed.gm"),
      fixture("healthcare_changed.kb"),
    );
    expect(session.findings).toHaveLength(2);
    expect(new Set(session.findings.map((f) => f.at))).toEqual(new Set(["G3", "T1"]));

    // every displayed CE is the payload value, untouched
    const graph = session.graph!;
    for (const node of graph.nodes) {
      if (node.ce !== null) {
        expect(JSON.stringify(node.ce)).toBe(JSON.stringify(session.model!.ce[node.id]));
      }
    }
    expect(graph.nodes.find((n) => n.id === "G3")!.conflicted).toBe(true);

    // click one: repair G3 with its only candidate plan
    session.selectFinding(session.findings.find((f) => f.at === "G3")!.id);
    const panes1 = session.panes();
    expect(panes1).toHaveLength(1);
    expect(await session.applySelected(panes1[0]!.digest)).toBe(true);
    expect(session.findings).toHaveLength(1);

    // click two: repair T1
    session.selectFinding(session.findings[0]!.id);
    const panes2 = session.panes();
    expect(panes2).toHaveLength(1);
    expect(await session.applySelected(panes2[0]!.digest)).toBe(true);
    expect(session.findings).toHaveLength(0);

    // the refreshed graph shows the synthesized carrier, no conflicts left
    const finalGraph = session.graph!;
    expect(finalGraph.nodes.some((n) => n.temp && n.name === "Consult Specialist")).toBe(true);
    expect(finalGraph.nodes.every((n) => !n.conflicted)).toBe(true);
    for (const node of finalGraph.nodes) {
      if (node.ce !== null) {
        expect(JSON.stringify(node.ce)).toBe(JSON.stringify(session.model!.ce[node.id]));
      }
    }
  }, 30_000);

  it("selection is pinned to the current revision", async () => {
    const session = await openSession(
      api,
      fixture("healthcare_changed.gm"),
      fixture("healthcare_changed.kb"),
    );
    expect(() => session.selectFinding("entailment:NOPE")).toThrow(/not part of revision/);
    session.selectFinding(session.findings[0]!.id);
    expect(() => session.panes()).not.toThrow();
    // a digest from a different finding is rejected before any request
    const other = session.findings[1]!.plans[0]!.digest;
    await expect(session.applySelected(other)).rejects.toThrow(/does not belong/);
  }, 30_000);
});

describe("B2: sibling conflict comparison", () => {
  it("renders two panes and either choice applies cleanly", async () => {
    for (const pick of [0, 1]) {
      const session = await openSession(api, fixture("figure16.gm"));
      const sibling = session.findings.find((f) => f.kind === "sibling")!;
      session.selectFinding(sibling.id);
      const panes = session.panes();
      expect(panes).toHaveLength(2);
      expect(panes.map((p) => p.label)).toEqual(["Solution 1", "Solution 2"]);
      expect(await session.applySelected(panes[pick]!.digest)).toBe(true);
      expect(session.findings.filter((f) => f.kind === "sibling")).toHaveLength(0);
      expect(session.graph!.nodes.every((n) => !n.conflicted)).toBe(true);
    }
  }, 30_000);

  it("a stale digest surfaces as a reload notice without corrupting state", async () => {
    const session = await openSession(
      api,
      fixture("healthcare_changed.gm"),
      fixture("healthcare_changed.kb"),
    );
    const target = session.findings[0]!;
    const digest = target.plans[0]!.digest;
    // another tab applies the same plan first
    await api.apply(session.sessionId, target.id, digest);
    session.selectFinding(target.id);
    expect(await session.applySelected(digest)).toBe(false);
    expect(session.notice?.kind).toBe("stale");
    await session.reload();
    expect(session.notice).toBeNull();
    expect(session.findings).toHaveLength(1);
  }, 30_000);
});

describe("history", () => {
  it("tracks the applied plan chain", async () => {
    const session = await openSession(
      api,
      fixture("healthcare_changed.gm"),
      fixture("healthcare_changed.kb"),
    );
    for (let i = 0; i < 2; i++) {
      session.selectFinding(session.findings[0]!.id);
      await session.applySelected(session.panes()[0]!.digest);
    }
    const history = await api.history(session.sessionId);
    expect(history).toHaveLength(3);
    expect(history[0]!.applied).toBeNull();
    expect(history[2]!.revision).toBe(session.revision);
  }, 30_000);
});
