// Workbench state: everything panels show is derived from kernel responses
// and events; there is no client-side code state. Reconnecting rebuilds the
// same panels from the kernel alone.

import { KernelConnection } from "./connection.js";
import {
  ChangeRecordRow,
  ClassRow,
  DeprecationEvent,
  FrameRow,
  InspectionReport,
  KernelEvent,
  PausedEvent,
  ReasonPayload,
  StepCommandRow,
  TestResultRow,
  ValuePayload,
  ViewDescriptor,
} from "./protocol.js";

export interface SessionPanel {
  sessionId: number;
  reason: ReasonPayload;
  frames: FrameRow[];
  selectedFrameId: number | null;
  frameSource: string;
}

export interface InspectorPane {
  objectId: number;
  report: InspectionReport;
  activeViewId: number;
  activeContent: ViewDescriptor | null;
}

export interface WorkbenchState {
  connected: boolean;
  banner: string | null;
  classes: ClassRow[];
  selectedClass: string | null;
  selectedSelector: string | null;
  methodSource: string;
  sessions: SessionPanel[];
  activeSessionId: number | null;
  stepCommands: StepCommandRow[];
  inspectorPanes: InspectorPane[];
  journal: ChangeRecordRow[];
  tests: TestResultRow[];
  deprecations: DeprecationEvent[];
  lastResult: string | null;
}

export function emptyState(): WorkbenchState {
  return {
    connected: false,
    banner: null,
    classes: [],
    selectedClass: null,
    selectedSelector: null,
    methodSource: "",
    sessions: [],
    activeSessionId: null,
    stepCommands: [],
    inspectorPanes: [],
    journal: [],
    tests: [],
    deprecations: [],
    lastResult: null,
  };
}

export class Workbench {
  state: WorkbenchState = emptyState();
  private listeners: Array<() => void> = [];
  private pendingWork = new Set<Promise<void>>();

  constructor(private connection: KernelConnection) {
    connection.onEvent((event) => this.handleEvent(event));
    connection.onClose(() => {
      this.state.connected = false;
      this.state.banner = "kernel connection lost";
      this.notify();
    });
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  private track(work: Promise<void>): void {
    this.pendingWork.add(work);
    work.catch(() => undefined).finally(() => this.pendingWork.delete(work));
  }

  /** Resolves once event-triggered background refreshes have drained. */
  async settled(): Promise<void> {
    while (this.pendingWork.size) {
      await Promise.all([...this.pendingWork]);
    }
  }

  // -- lifecycle -------------------------------------------------------------

  async start(): Promise<void> {
    this.state.connected = true;
    this.state.banner = null;
    await Promise.all([
      this.refreshClasses(),
      this.refreshStepCommands(),
      this.refreshJournal(),
    ]);
    // panels are server-side truth: open sessions reappear after a reload
    const listing = (await this.connection.request("sessions")) as {
      sessions: Array<{ sessionId: number; reason: ReasonPayload }>;
    };
    for (const entry of listing.sessions) {
      if (!this.panel(entry.sessionId)) {
        this.state.sessions.push({
          sessionId: entry.sessionId,
          reason: entry.reason,
          frames: [],
          selectedFrameId: null,
          frameSource: "",
        });
      }
      await this.refreshSession(entry.sessionId);
    }
    if (listing.sessions.length && this.state.activeSessionId === null) {
      this.state.activeSessionId = listing.sessions[0].sessionId;
    }
    this.notify();
  }

  private handleEvent(event: KernelEvent): void {
    if (event.event === "paused") {
      const paused = event as PausedEvent;
      this.upsertSession(paused);
      this.track(this.refreshSession(paused.sessionId));
      return;
    }
    if (event.event === "deprecation") {
      this.state.deprecations.push(event as DeprecationEvent);
      this.notify();
    }
  }

  private upsertSession(paused: PausedEvent): void {
    let panel = this.panel(paused.sessionId);
    if (!panel) {
      panel = {
        sessionId: paused.sessionId,
        reason: paused.reason,
        frames: paused.topFrame ? [paused.topFrame] : [],
        selectedFrameId: paused.topFrame ? paused.topFrame.frameId : null,
        frameSource: "",
      };
      this.state.sessions.push(panel);
    } else {
      panel.reason = paused.reason;
    }
    this.state.activeSessionId = paused.sessionId;
    this.notify();
  }

  panel(sessionId: number): SessionPanel | undefined {
    return this.state.sessions.find((s) => s.sessionId === sessionId);
  }

  // -- code browser ------------------------------------------------------------

  async refreshClasses(): Promise<void> {
    const result = (await this.connection.request("listClasses")) as {
      classes: ClassRow[];
    };
    this.state.classes = result.classes.filter((c) => !c.builtin);
    this.notify();
  }

  async selectClass(name: string): Promise<void> {
    this.state.selectedClass = name;
    this.state.selectedSelector = null;
    this.state.methodSource = "";
    this.notify();
  }

  async selectMethod(className: string, selector: string): Promise<void> {
    const result = (await this.connection.request("methodSource", {
      className,
      selector,
    })) as { source: string };
    this.state.selectedClass = className;
    this.state.selectedSelector = selector;
    this.state.methodSource = result.source;
    this.notify();
  }

  async saveMethod(className: string, source: string): Promise<void> {
    const result = (await this.connection.request("defineMethod", {
      className,
      source,
    })) as { selector: string };
    await this.refreshClasses();
    await this.selectMethod(className, result.selector);
    await this.refreshJournal();
  }

  async evaluate(source: string): Promise<void> {
    const result = (await this.connection.request("eval", { source })) as ValuePayload;
    if (!result.paused) {
      this.state.lastResult = result.value;
      if (result.objectId !== undefined) {
        await this.inspectRoot(result.objectId);
      }
    }
    this.notify();
  }

  // -- tests ---------------------------------------------------------------------

  async runTests(filter?: string): Promise<void> {
    const params: Record<string, unknown> = {};
    if (filter) params.filter = filter;
    const result = (await this.connection.request("runTests", params)) as {
      results: TestResultRow[];
    };
    this.state.tests = result.results;
    this.notify();
  }

  private markLinkedTestPassed(sessionId: number, failedAssertions: number): void {
    for (const row of this.state.tests) {
      if (row.sessionId === sessionId) {
        row.outcome = failedAssertions === 0 ? "pass" : "fail";
        row.sessionId = null;
      }
    }
  }

  // -- debugger panel --------------------------------------------------------------

  async refreshSession(sessionId: number): Promise<void> {
    const panel = this.panel(sessionId);
    if (!panel) return;
    const result = (await this.connection.request("stack", { sessionId })) as {
      frames: FrameRow[];
    };
    panel.frames = result.frames;
    if (!result.frames.some((f) => f.frameId === panel.selectedFrameId)) {
      panel.selectedFrameId = result.frames.length ? result.frames[0].frameId : null;
    }
    await this.loadFrameSource(panel);
    this.notify();
  }

  private async loadFrameSource(panel: SessionPanel): Promise<void> {
    const frame = panel.frames.find((f) => f.frameId === panel.selectedFrameId);
    if (!frame || frame.kind === "top" || frame.kind === "pending" || !frame.className) {
      panel.frameSource = "";
      return;
    }
    const selector = frame.kind === "block"
      ? frame.selector.replace(/^\[\] in /, "")
      : frame.selector;
    try {
      const result = (await this.connection.request("methodSource", {
        className: frame.className,
        selector,
      })) as { source: string };
      panel.frameSource = result.source;
    } catch {
      panel.frameSource = "";
    }
  }

  async selectFrame(sessionId: number, frameId: number): Promise<void> {
    const panel = this.panel(sessionId);
    if (!panel) return;
    panel.selectedFrameId = frameId;
    await this.loadFrameSource(panel);
    this.notify();
  }

  async step(sessionId: number, mode: "into" | "over"): Promise<void> {
    const result = (await this.connection.request("step", {
      sessionId,
      mode,
    })) as ValuePayload;
    await this.afterRunOutcome(sessionId, result);
  }

  async stepUntilCommand(sessionId: number, command: string): Promise<void> {
    const result = (await this.connection.request("stepUntil", {
      sessionId,
      command,
    })) as ValuePayload;
    await this.afterRunOutcome(sessionId, result);
  }

  async resume(sessionId: number): Promise<void> {
    const result = (await this.connection.request("resume", {
      sessionId,
    })) as ValuePayload;
    await this.afterRunOutcome(sessionId, result);
  }

  async restartFrame(sessionId: number, frameId: number): Promise<void> {
    const result = (await this.connection.request("restartFrame", {
      sessionId,
      frameId,
    })) as ValuePayload;
    await this.afterRunOutcome(sessionId, result);
  }

  async createMissingMethod(sessionId: number, body?: string): Promise<void> {
    const params: Record<string, unknown> = { sessionId };
    if (body && body.trim()) params.body = body;
    const result = (await this.connection.request(
      "createMissingMethod", params)) as ValuePayload;
    await this.refreshClasses();
    await this.refreshJournal();
    await this.afterRunOutcome(sessionId, result);
  }

  async recompileFrame(sessionId: number, frameId: number, source: string): Promise<void> {
    const result = (await this.connection.request("recompileFrameMethod", {
      sessionId,
      frameId,
      source,
    })) as ValuePayload;
    await this.refreshJournal();
    await this.afterRunOutcome(sessionId, result);
  }

  private async afterRunOutcome(sessionId: number, result: ValuePayload): Promise<void> {
    if (result.completed) {
      this.markLinkedTestPassed(sessionId, result.failedAssertions ?? 0);
      this.state.sessions = this.state.sessions.filter(
        (s) => s.sessionId !== sessionId);
      if (this.state.activeSessionId === sessionId) {
        const remaining = this.state.sessions;
        this.state.activeSessionId = remaining.length
          ? remaining[remaining.length - 1].sessionId
          : null;
      }
      this.state.lastResult = result.value;
      this.notify();
      return;
    }
    await this.refreshSession(sessionId);
  }

  async refreshStepCommands(): Promise<void> {
    const result = (await this.connection.request("listStepCommands")) as {
      commands: StepCommandRow[];
    };
    this.state.stepCommands = result.commands;
    this.notify();
  }

  async registerStepCommand(name: string, kind: string, value: string): Promise<void> {
    await this.connection.request("registerStepCommand", {
      name,
      spec: { kind, value },
    });
    await this.refreshStepCommands();
  }

  // -- inspector ----------------------------------------------------------------------

  async inspectRoot(objectId: number): Promise<void> {
    this.state.inspectorPanes = [await this.makePane(objectId)];
    this.notify();
  }

  async openDetail(paneIndex: number, objectId: number): Promise<void> {
    const chain = this.state.inspectorPanes.slice(0, paneIndex + 1);
    chain.push(await this.makePane(objectId));
    this.state.inspectorPanes = chain;
    this.notify();
  }

  async selectView(paneIndex: number, viewId: number): Promise<void> {
    const pane = this.state.inspectorPanes[paneIndex];
    if (!pane) return;
    pane.activeViewId = viewId;
    pane.activeContent = (await this.connection.request("viewContent", {
      objectId: pane.objectId,
      viewId,
    })) as ViewDescriptor;
    this.state.inspectorPanes = this.state.inspectorPanes.slice(0, paneIndex + 1);
    this.notify();
  }

  private async makePane(objectId: number): Promise<InspectorPane> {
    const report = (await this.connection.request("inspect", {
      objectId,
    })) as InspectionReport;
    const first = report.views[0];
    const activeContent = (await this.connection.request("viewContent", {
      objectId,
      viewId: first.viewId,
    })) as ViewDescriptor;
    return { objectId, report, activeViewId: first.viewId, activeContent };
  }

  // -- journal timeline ------------------------------------------------------------------

  async refreshJournal(): Promise<void> {
    const result = (await this.connection.request("journal", {})) as {
      records: ChangeRecordRow[];
    };
    this.state.journal = result.records;
    this.notify();
  }

  async rollbackTo(seq: number): Promise<void> {
    await this.connection.request("rollbackTo", { seq });
    await this.refreshJournal();
    await this.refreshClasses();
    const { selectedClass, selectedSelector } = this.state;
    if (selectedClass && selectedSelector) {
      const klass = this.state.classes.find((c) => c.name === selectedClass);
      if (klass && klass.selectors.includes(selectedSelector)) {
        await this.selectMethod(selectedClass, selectedSelector);
      } else {
        this.state.selectedSelector = null;
        this.state.methodSource = "";
      }
    }
    this.notify();
  }
}
