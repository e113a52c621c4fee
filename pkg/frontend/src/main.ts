import { AnalysisApi } from "./api.js";
import { conditionText, renderSvg } from "./graph.js";
import { findingHeadline } from "./plans.js";
import { AnalystSession, openSession } from "./state.js";

// Browser wiring only; everything it shows comes from AnalystSession.

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

let session: AnalystSession | null = null;

function serviceBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("service") ?? window.location.origin;
}

function render(): void {
  if (!session) return;
  $("revision").textContent = session.revision.slice(0, 12);
  const notice = $("notice");
  if (session.notice) {
    notice.textContent = session.notice.message;
    notice.classList.remove("hidden");
  } else {
    notice.classList.add("hidden");
  }

  const graph = session.graph;
  $("graph").innerHTML = graph ? renderSvg(graph) : "";

  const list = $("findings");
  list.innerHTML = "";
  if (session.findings.length === 0) {
    const li = document.createElement("li");
    li.className = "clean";
    li.textContent = "No conflicts: the model is clean.";
    list.appendChild(li);
  }
  for (const finding of session.findings) {
    const li = document.createElement("li");
    const button = document.createElement("button");
    button.textContent = findingHeadline(finding);
    button.dataset.finding = finding.id;
    button.addEventListener("click", () => {
      session!.selectFinding(finding.id);
      render();
    });
    if (session.selectedFinding?.id === finding.id) {
      button.classList.add("selected");
    }
    li.appendChild(button);
    list.appendChild(li);
  }

  const panes = $("panes");
  panes.innerHTML = "";
  const selected = session.selectedFinding;
  if (selected) {
    const views = session.panes();
    if (views.length === 0) {
      const div = document.createElement("div");
      div.className = "pane notice";
      div.textContent = "No automated resolution is available for this finding.";
      panes.appendChild(div);
    }
    for (const pane of views) {
      const div = document.createElement("div");
      div.className = "pane";
      const heading = document.createElement("h3");
      heading.textContent = pane.label;
      div.appendChild(heading);
      const ul = document.createElement("ul");
      for (const line of pane.summary) {
        const li = document.createElement("li");
        li.textContent = line;
        ul.appendChild(li);
      }
      div.appendChild(ul);
      const apply = document.createElement("button");
      apply.textContent = "Apply this plan";
      apply.addEventListener("click", async () => {
        apply.disabled = true;
        try {
          await session!.applySelected(pane.digest);
        } finally {
          render();
        }
      });
      div.appendChild(apply);
      panes.appendChild(div);
    }
  }

  const detail = $("detail");
  const model = session.model;
  if (selected && model) {
    const ce = model.ce[selected.at];
    detail.textContent =
      `${selected.at} IE: ` +
      conditionText(model.document.artefacts.find((a) => a.id === selected.at)?.ie ?? []) +
      (ce ? `\n${selected.at} CE: ${conditionText(ce)}` : "") +
      (selected.conflicting.length ? `\nconflicting: {${selected.conflicting.join(", ")}}` : "");
  } else {
    detail.textContent = "";
  }
}

async function boot(): Promise<void> {
  const api = new AnalysisApi(serviceBase());
  $("open").addEventListener("click", async () => {
    const model = ($("model-input") as HTMLTextAreaElement).value;
    const kb = ($("kb-input") as HTMLTextAreaElement).value;
    try {
      session = await openSession(api, model, kb);
      $("workspace").classList.remove("hidden");
      render();
    } catch (err) {
      $("notice").textContent = String(err);
      $("notice").classList.remove("hidden");
    }
  });
  $("reload").addEventListener("click", async () => {
    if (session) {
      await session.reload();
      render();
    }
  });
}

boot();
