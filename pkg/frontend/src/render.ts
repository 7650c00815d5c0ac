// Pure renderers: state in, HTML strings out. The app layer wires clicks via
// data-action attributes; nothing here touches the DOM, which keeps every
// panel testable as a string.

import { DEBUGGER_CONTROLS } from "./controls.js";
import { FrameRow, ViewDescriptor, ViewRow } from "./protocol.js";
import { InspectorPane, SessionPanel, WorkbenchState } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function attr(value: string | number): string {
  return escapeHtml(String(value));
}

export function renderBanner(state: WorkbenchState): string {
  if (state.connected && !state.banner) return "";
  const text = state.banner ?? "connecting";
  return `<div class="banner error" data-banner>` +
    `${escapeHtml(text)} ` +
    `<button data-action="retry-connect">Retry</button></div>`;
}

export function renderClassBrowser(state: WorkbenchState): string {
  const classes = state.classes
    .map((c) => {
      const active = c.name === state.selectedClass ? " active" : "";
      return `<li class="class-item${active}" data-action="select-class" ` +
        `data-class="${attr(c.name)}">${escapeHtml(c.name)}</li>`;
    })
    .join("");
  const selected = state.classes.find((c) => c.name === state.selectedClass);
  const selectors = selected
    ? selected.selectors
        .map((s) => {
          const active = s === state.selectedSelector ? " active" : "";
          return `<li class="selector-item${active}" data-action="select-method" ` +
            `data-class="${attr(selected.name)}" data-selector="${attr(s)}">` +
            `${escapeHtml(s)}</li>`;
        })
        .join("")
    : "";
  const source = state.methodSource
    ? `<textarea data-role="method-source" rows="10">${escapeHtml(state.methodSource)}</textarea>` +
      `<button data-action="save-method" data-class="${attr(state.selectedClass ?? "")}">Save</button>`
    : "";
  return `<section class="browser"><h2>Classes</h2><ul>${classes}</ul>` +
    `<h3>Methods</h3><ul>${selectors}</ul>${source}</section>`;
}

export function renderTests(state: WorkbenchState): string {
  const rows = state.tests
    .map((t) => {
      const session = t.sessionId !== null
        ? ` <a data-action="focus-session" data-session="${t.sessionId}">session ${t.sessionId}</a>`
        : "";
      return `<li class="test ${t.outcome}">` +
        `${escapeHtml(t.className)}&gt;&gt;${escapeHtml(t.selector)}: ${t.outcome}${session}</li>`;
    })
    .join("");
  return `<section class="tests"><h2>Tests</h2>` +
    `<button data-action="run-tests">Run tests</button><ul>${rows}</ul></section>`;
}

function reasonText(panel: SessionPanel): string {
  const reason = panel.reason;
  const detail = reason.selector ?? reason.message ?? "";
  return detail ? `${reason.kind}: ${detail}` : reason.kind;
}

export function renderDebugger(state: WorkbenchState): string {
  if (!state.sessions.length) {
    return `<section class="debugger"><h2>Debugger</h2><p>No paused sessions.</p></section>`;
  }
  const tabs = state.sessions
    .map((s) => {
      const active = s.sessionId === state.activeSessionId ? " active" : "";
      return `<button class="session-tab${active}" data-action="focus-session" ` +
        `data-session="${s.sessionId}">#${s.sessionId}</button>`;
    })
    .join("");
  const panel = state.sessions.find((s) => s.sessionId === state.activeSessionId);
  return `<section class="debugger"><h2>Debugger</h2>` +
    `<div class="session-tabs">${tabs}</div>` +
    (panel ? renderSessionPanel(state, panel) : "") +
    `</section>`;
}

function renderSessionPanel(state: WorkbenchState, panel: SessionPanel): string {
  const sid = panel.sessionId;
  const banner = panel.reason.kind === "messageNotUnderstood"
    ? renderCreateMethodBanner(panel)
    : "";
  const frames = panel.frames
    .map((f) => {
      const active = f.frameId === panel.selectedFrameId ? " active" : "";
      const where = f.className ? `${f.className}&gt;&gt;${escapeHtml(f.selector)}` : escapeHtml(f.selector);
      return `<li class="frame${active}" data-action="select-frame" ` +
        `data-session="${sid}" data-frame="${f.frameId}">` +
        `${where} (line ${f.line}) · ${escapeHtml(f.receiver)}</li>`;
    })
    .join("");
  const commandOptions = state.stepCommands
    .map((c) => `<option value="${attr(c.name)}">${escapeHtml(c.name)}</option>`)
    .join("");
  const commands = state.stepCommands.length
    ? `<select data-role="step-command">${commandOptions}</select>` +
      `<button data-action="step-until-command" data-session="${sid}">Run step command</button>`
    : "";
  const selected = panel.frames.find((f) => f.frameId === panel.selectedFrameId);
  const editor = selected && panel.frameSource
    ? renderFrameEditor(panel, selected)
    : "";
  return `<div class="session" data-session-panel="${sid}">` +
    `<p class="reason">${escapeHtml(reasonText(panel))}</p>` +
    banner +
    `<div class="controls">` +
    `<button data-action="step-into" data-session="${sid}">Step into</button>` +
    `<button data-action="step-over" data-session="${sid}">Step over</button>` +
    `<button data-action="resume" data-session="${sid}">Resume</button>` +
    `<button data-action="restart-frame" data-session="${sid}">Restart frame</button>` +
    commands +
    `</div>` +
    `<ol class="stack">${frames}</ol>` +
    editor +
    `</div>`;
}

function renderCreateMethodBanner(panel: SessionPanel): string {
  const selector = panel.reason.selector ?? "";
  const receiver = panel.reason.receiver?.value ?? "";
  const args = (panel.reason.args ?? []).map((a) => a.value).join(", ");
  return `<div class="create-method-banner" data-role="create-method-banner">` +
    `<p>${escapeHtml(receiver)} does not understand ` +
    `<code>${escapeHtml(selector)}</code>${args ? ` (args: ${escapeHtml(args)})` : ""}.</p>` +
    `<textarea data-role="method-body" rows="3" ` +
    `placeholder="method body (default: self notYetImplemented)"></textarea>` +
    `<button data-action="create-missing-method" data-session="${panel.sessionId}">` +
    `Create ${escapeHtml(selector)}</button></div>`;
}

function renderFrameEditor(panel: SessionPanel, frame: FrameRow): string {
  const pcLine = frame.line;
  const lines = panel.frameSource.split("\n")
    .map((line, index) => {
      const marker = index + 1 === pcLine ? " pc" : "";
      return `<div class="src-line${marker}" data-line="${index + 1}">` +
        `${escapeHtml(line) || "&nbsp;"}</div>`;
    })
    .join("");
  return `<div class="frame-source"><div class="listing">${lines}</div>` +
    `<textarea data-role="frame-editor" rows="8">${escapeHtml(panel.frameSource)}</textarea>` +
    `<button data-action="save-frame-method" data-session="${panel.sessionId}" ` +
    `data-frame="${frame.frameId}">Save and restart</button></div>`;
}

export function renderInspector(state: WorkbenchState): string {
  if (!state.inspectorPanes.length) {
    return `<section class="inspector"><h2>Inspector</h2><p>Nothing inspected.</p></section>`;
  }
  const panes = state.inspectorPanes
    .map((pane, index) => renderInspectorPane(pane, index))
    .join("");
  return `<section class="inspector"><h2>Inspector</h2>` +
    `<div class="pane-chain">${panes}</div></section>`;
}

function renderInspectorPane(pane: InspectorPane, index: number): string {
  const tabs = pane.report.views
    .map((view) => {
      const active = view.viewId === pane.activeViewId ? " active" : "";
      return `<button class="view-tab${active}" data-action="select-view" ` +
        `data-pane="${index}" data-view="${view.viewId}">${escapeHtml(view.title)}</button>`;
    })
    .join("");
  return `<div class="pane" data-pane="${index}">` +
    `<header>${escapeHtml(pane.report.printString)}</header>` +
    `<div class="view-tabs">${tabs}</div>` +
    renderViewContent(pane.activeContent, index) +
    `</div>`;
}

function renderViewContent(view: ViewDescriptor | null, paneIndex: number): string {
  if (!view) return `<div class="view-body empty"></div>`;
  if (view.kind === "text") {
    return `<pre class="view-body text">${escapeHtml(String(view.content ?? ""))}</pre>`;
  }
  const rows = (view.content as ViewRow[] | null) ?? [];
  const cells = rows
    .map((row) => {
      const navigable = row.objectId !== null
        ? ` data-action="open-detail" data-pane="${paneIndex}" data-object="${row.objectId}" class="navigable"`
        : "";
      return `<tr><th>${escapeHtml(row.label)}</th>` +
        `<td${navigable}>${escapeHtml(row.printString)}</td></tr>`;
    })
    .join("");
  return `<table class="view-body ${view.kind ?? "fields"}">${cells}</table>`;
}

export function renderJournal(state: WorkbenchState): string {
  const rows = state.journal
    .map((record) => {
      const target = record.selector
        ? `${record.className}&gt;&gt;${escapeHtml(record.selector)}`
        : record.className;
      return `<li class="journal-entry origin-${attr(record.origin)}">` +
        `<span class="seq">${record.seq}</span> ${record.kind} ${target} ` +
        `<em>${record.origin}</em> ` +
        `<button data-action="rollback" data-seq="${record.seq - 1}">` +
        `Roll back to before</button></li>`;
    })
    .join("");
  return `<section class="journal"><h2>Change journal</h2><ol>${rows}</ol></section>`;
}

export function renderDeprecations(state: WorkbenchState): string {
  if (!state.deprecations.length) return "";
  const rows = state.deprecations
    .map((d) => `<li>${escapeHtml(d.selector)} from ${escapeHtml(d.caller)} ` +
      `(${d.rewritten ? "rewritten" : "not rewritten"}): ${escapeHtml(d.message)}</li>`)
    .join("");
  return `<section class="deprecations"><h2>Deprecation warnings</h2><ul>${rows}</ul></section>`;
}

export function renderWorkbench(state: WorkbenchState): string {
  const result = state.lastResult !== null
    ? `<div class="last-result">→ ${escapeHtml(state.lastResult)}</div>`
    : "";
  return renderBanner(state) +
    `<div class="columns">` +
    renderClassBrowser(state) +
    `<div class="middle">` + renderTests(state) + renderDebugger(state) + result + `</div>` +
    renderInspector(state) +
    `</div>` +
    renderJournal(state) +
    renderDeprecations(state);
}

export const CONTROL_ACTIONS = DEBUGGER_CONTROLS.map((c) => c.control);
