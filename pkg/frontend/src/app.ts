// Browser entry: connect to the bridge, render on every state change, and
// translate clicks (data-action attributes) into workbench gestures. One
// in-flight request per gesture; events refresh panels as they arrive.

import { KernelConnection, WebSocketTransport } from "./connection.js";
import { renderWorkbench } from "./render.js";
import { Workbench } from "./state.js";

function bridgeUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("bridge") ?? `ws://${window.location.hostname || "127.0.0.1"}:8787`;
}

let workbench: Workbench | null = null;

function mount(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  connect(root);
  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest("[data-action]");
    if (!target || !workbench) return;
    void handleAction(root, workbench, target as HTMLElement);
  });
}

function connect(root: HTMLElement): void {
  const socket = new WebSocket(bridgeUrl());
  socket.onopen = () => {
    const bench = new Workbench(new KernelConnection(new WebSocketTransport(socket)));
    workbench = bench;
    bench.onChange(() => {
      root.innerHTML = renderWorkbench(bench.state);
    });
    void bench.start();
  };
  socket.onerror = () => {
    root.innerHTML =
      `<div class="banner error">cannot reach the kernel bridge at ` +
      `${bridgeUrl()} <button data-action="retry-connect">Retry</button></div>`;
  };
}

async function handleAction(root: HTMLElement, bench: Workbench,
                            element: HTMLElement): Promise<void> {
  const action = element.dataset.action!;
  const sessionId = Number(element.dataset.session ?? "0");
  const read = (role: string): string => {
    const panel = element.closest(".session, .browser, [data-pane]") ?? root;
    const field = panel.querySelector<HTMLTextAreaElement | HTMLSelectElement>(
      `[data-role="${role}"]`);
    return field ? field.value : "";
  };
  try {
    switch (action) {
      case "retry-connect":
        connect(root);
        return;
      case "select-class":
        return await bench.selectClass(element.dataset.class!);
      case "select-method":
        return await bench.selectMethod(element.dataset.class!,
                                        element.dataset.selector!);
      case "save-method":
        return await bench.saveMethod(element.dataset.class!,
                                      read("method-source"));
      case "run-tests":
        return await bench.runTests();
      case "focus-session":
        bench.state.activeSessionId = sessionId;
        return await bench.refreshSession(sessionId);
      case "select-frame":
        return await bench.selectFrame(sessionId, Number(element.dataset.frame));
      case "step-into":
        return await bench.step(sessionId, "into");
      case "step-over":
        return await bench.step(sessionId, "over");
      case "step-until-command":
        return await bench.stepUntilCommand(sessionId, read("step-command"));
      case "resume":
        return await bench.resume(sessionId);
      case "restart-frame": {
        const panel = bench.panel(sessionId);
        if (panel?.selectedFrameId != null) {
          await bench.restartFrame(sessionId, panel.selectedFrameId);
        }
        return;
      }
      case "create-missing-method":
        return await bench.createMissingMethod(sessionId, read("method-body"));
      case "save-frame-method":
        return await bench.recompileFrame(sessionId,
                                          Number(element.dataset.frame),
                                          read("frame-editor"));
      case "select-view":
        return await bench.selectView(Number(element.dataset.pane),
                                      Number(element.dataset.view));
      case "open-detail":
        return await bench.openDetail(Number(element.dataset.pane),
                                      Number(element.dataset.object));
      case "rollback":
        return await bench.rollbackTo(Number(element.dataset.seq));
      default:
        return;
    }
  } catch (error) {
    const note = document.createElement("div");
    note.className = "banner error";
    note.textContent = String(error);
    root.prepend(note);
    setTimeout(() => note.remove(), 4000);
  }
}

mount();
