// End-to-end against the real kernel process, consuming only the protocol.

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { renderDebugger, renderInspector, renderTests } from "../src/render.js";
import { Workbench } from "../src/state.js";
import { RunningKernel, startKernel } from "./real-kernel.js";

describe("workbench against a live kernel", () => {
  let kernel: RunningKernel;

  beforeAll(async () => {
    kernel = await startKernel(["logistics.lob", "geo.lob"]);
  }, 30000);

  afterAll(() => {
    kernel?.stop();
  });

  it("drives the missing-method repair flow from UI gestures to a green test",
     { timeout: 30000 }, async () => {
    const connection = await kernel.connect();
    const workbench = new Workbench(connection);
    await workbench.start();

    // class browser shows the fixture classes
    expect(workbench.state.classes.map((c) => c.name)).toContain("RoutePlan");

    await workbench.runTests();
    await workbench.settled();
    const failing = workbench.state.tests.find((t) => t.outcome !== "pass");
    expect(failing?.selector).toBe("testSchedulePackage");
    expect(workbench.state.sessions).toHaveLength(1);
    const sessionId = workbench.state.sessions[0].sessionId;

    // the panel renders the create-method banner for the MNU pause
    const html = renderDebugger(workbench.state);
    expect(html).toContain("create-method-banner");
    expect(html).toContain("schedulePackage:for:");

    await workbench.createMissingMethod(
      sessionId, "^ self addDelivery: p1 on: p2");
    await workbench.settled();
    const panel = workbench.panel(sessionId);
    expect(panel?.reason.kind).toBe("stepComplete");
    expect(panel?.frames[0].className).toBe("RoutePlan");
    expect(panel?.frames[0].selector).toBe("schedulePackage:for:");

    await workbench.resume(sessionId);
    await workbench.settled();
    expect(workbench.state.sessions).toHaveLength(0);
    expect(workbench.state.tests.every((t) => t.outcome === "pass")).toBe(true);
    expect(renderTests(workbench.state)).not.toContain('class="test error"');

    // the repaired method is real, journaled code
    await workbench.selectMethod("RoutePlan", "schedulePackage:for:");
    expect(workbench.state.methodSource).toContain("addDelivery: p1 on: p2");
    connection.close();
  });

  it("shows inspector tabs in kernel order and navigates into fields",
     { timeout: 30000 }, async () => {
    const connection = await kernel.connect();
    const workbench = new Workbench(connection);
    await workbench.start();

    await workbench.evaluate(
      "| c | c := EarthMapCountry new. c name: 'France'. c path: 'M 0 0 Z'. c");
    await workbench.settled();
    expect(workbench.state.inspectorPanes).toHaveLength(1);
    const pane = workbench.state.inspectorPanes[0];
    expect(pane.report.views.map((v) => v.title)).toEqual(["Shape", "Raw"]);
    expect(pane.activeContent?.kind).toBe("text");
    expect(pane.activeContent?.content).toBe("M 0 0 Z");

    const rendered = renderInspector(workbench.state);
    expect(rendered.indexOf(">Shape<")).toBeLessThan(rendered.indexOf(">Raw<"));

    const rawView = pane.report.views[1];
    await workbench.selectView(0, rawView.viewId);
    const rows = workbench.state.inspectorPanes[0].activeContent?.content;
    expect(Array.isArray(rows)).toBe(true);
    const nameRow = (rows as Array<{ label: string; objectId: number | null }>)
      .find((r) => r.label === "name");
    expect(nameRow?.objectId).not.toBeNull();
    await workbench.openDetail(0, nameRow!.objectId!);
    expect(workbench.state.inspectorPanes).toHaveLength(2);
    expect(workbench.state.inspectorPanes[1].report.className).toBe("String");
    connection.close();
  });

  it("journal rollback from the timeline refreshes the browser to the rolled-back source",
     { timeout: 30000 }, async () => {
    const connection = await kernel.connect();
    const workbench = new Workbench(connection);
    await workbench.start();

    await workbench.selectMethod("RoutePlan", "defaultSchedulePlan");
    const original = workbench.state.methodSource;
    const checkpoint = workbench.state.journal.length
      ? workbench.state.journal[workbench.state.journal.length - 1].seq
      : 0;

    await workbench.saveMethod(
      "RoutePlan", "defaultSchedulePlan [ ^ 'rewritten' ]");
    expect(workbench.state.methodSource).toContain("rewritten");

    await workbench.rollbackTo(checkpoint);
    expect(workbench.state.methodSource).toBe(original);
    expect(workbench.state.journal.length).toBeGreaterThan(checkpoint);
    connection.close();
  });

  it("reconnecting reproduces open session panels from kernel state alone",
     { timeout: 30000 }, async () => {
    const first = await kernel.connect();
    const workbench = new Workbench(first);
    await workbench.start();
    await workbench.evaluate("self halt. 42");
    await workbench.settled();
    expect(workbench.state.sessions.length).toBeGreaterThan(0);
    const sessionId = workbench.state.sessions[0].sessionId;
    first.close();

    await new Promise((resolve) => setTimeout(resolve, 200));
    const second = await kernel.connect();
    const reloaded = new Workbench(second);
    await reloaded.start();
    expect(reloaded.state.sessions.map((s) => s.sessionId)).toContain(sessionId);
    await reloaded.resume(sessionId);
    expect(reloaded.state.lastResult).toBe("42");
    second.close();
  });
});
