import { describe, expect, it } from "vitest";

import { KernelConnection, KernelRequestError } from "../src/connection.js";
import { KernelEvent } from "../src/protocol.js";
import { FakeTransport, emptyWorldResponder } from "./fake-transport.js";

describe("KernelConnection", () => {
  it("assigns strictly increasing request ids", async () => {
    const transport = new FakeTransport(emptyWorldResponder());
    const connection = new KernelConnection(transport);
    await Promise.all([
      connection.request("listClasses"),
      connection.request("journal"),
      connection.request("sessions"),
    ]);
    expect(transport.sent.map((r) => r.id)).toEqual([1, 2, 3]);
  });

  it("routes responses to the matching pending request", async () => {
    const transport = new FakeTransport((method) =>
      method === "methodSource"
        ? { result: { source: "f [ ^ 1 ]" } }
        : { result: { classes: [] } });
    const connection = new KernelConnection(transport);
    const [classes, source] = await Promise.all([
      connection.request("listClasses"),
      connection.request("methodSource", { className: "A", selector: "f" }),
    ]);
    expect(classes).toEqual({ classes: [] });
    expect(source).toEqual({ source: "f [ ^ 1 ]" });
    expect(connection.pendingCount).toBe(0);
  });

  it("rejects with the kernel error code and message", async () => {
    const transport = new FakeTransport(() => ({
      error: { code: -3, message: "unknown class 'Ghost'" },
    }));
    const connection = new KernelConnection(transport);
    const failure = await connection.request("methodSource", {}).catch((e) => e);
    expect(failure).toBeInstanceOf(KernelRequestError);
    expect(failure.code).toBe(-3);
    expect(failure.message).toContain("Ghost");
  });

  it("delivers events to subscribers before the response settles", async () => {
    const pausedEvent = {
      event: "paused",
      sessionId: 1,
      reason: { kind: "haltInstruction" },
      topFrame: null,
    };
    const transport = new FakeTransport((method) =>
      method === "eval"
        ? { result: { paused: true, sessionId: 1 }, events: [pausedEvent] }
        : { result: {} });
    const connection = new KernelConnection(transport);
    const order: string[] = [];
    connection.onEvent((event: KernelEvent) => order.push(`event:${event.event}`));
    const result = await connection.request("eval", { source: "self halt" });
    order.push("response");
    expect(order).toEqual(["event:paused", "response"]);
    expect(result).toEqual({ paused: true, sessionId: 1 });
  });

  it("rejects everything pending when the transport closes", async () => {
    let trapped: ((line: string) => void) | null = null;
    const transport: {
      send: (line: string) => void;
      onLine: (h: (line: string) => void) => void;
      onClose: (h: () => void) => void;
      close: () => void;
      closeHandlers: Array<() => void>;
    } = {
      closeHandlers: [],
      send: () => undefined, // never answers
      onLine: (h) => {
        trapped = h;
      },
      onClose: (h) => transport.closeHandlers.push(h),
      close: () => transport.closeHandlers.forEach((h) => h()),
    };
    const connection = new KernelConnection(transport);
    const pending = connection.request("eval", { source: "1" }).catch((e) => e);
    transport.close();
    const failure = await pending;
    expect(String(failure)).toContain("connection closed");
    const afterClose = await connection.request("eval").catch((e) => e);
    expect(String(afterClose)).toContain("connection closed");
    expect(trapped).not.toBeNull();
  });

  it("ignores malformed lines instead of crashing", async () => {
    const transport = new FakeTransport(emptyWorldResponder());
    const connection = new KernelConnection(transport);
    transport.deliver("{not json");
    const result = await connection.request("listClasses");
    expect(result).toEqual({ classes: [] });
  });
});
