// KernelConnection: request/response bookkeeping over any line transport.
// Request ids are strictly increasing per connection; every pending request
// holds its continuation until the matching response line arrives. Events
// fan out to subscribers in arrival order.

import {
  DecodedLine,
  KernelEvent,
  KernelResponse,
  decodeLine,
  encodeRequest,
} from "./protocol.js";

export interface Transport {
  send(line: string): void;
  onLine(handler: (line: string) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

export class KernelRequestError extends Error {
  constructor(public code: number, message: string) {
    super(message);
    this.name = "KernelRequestError";
  }
}

interface Pending {
  resolve: (result: unknown) => void;
  reject: (error: Error) => void;
  method: string;
}

export class KernelConnection {
  private nextId = 1;
  private pending = new Map<number, Pending>();
  private eventHandlers: Array<(event: KernelEvent) => void> = [];
  private closeHandlers: Array<() => void> = [];
  private closed = false;

  constructor(private transport: Transport) {
    transport.onLine((line) => this.dispatch(line));
    transport.onClose(() => this.handleClose());
  }

  request(method: string, params?: Record<string, unknown>): Promise<unknown> {
    if (this.closed) {
      return Promise.reject(new Error("connection closed"));
    }
    const id = this.nextId++;
    const line = encodeRequest({ id, method, params });
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject, method });
      this.transport.send(line);
    });
  }

  onEvent(handler: (event: KernelEvent) => void): void {
    this.eventHandlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closeHandlers.push(handler);
  }

  get pendingCount(): number {
    return this.pending.size;
  }

  close(): void {
    this.transport.close();
    this.handleClose();
  }

  private dispatch(line: string): void {
    if (!line.trim()) return;
    let decoded: DecodedLine;
    try {
      decoded = decodeLine(line);
    } catch {
      return; // not ours to crash on: a malformed line is dropped
    }
    if (decoded.type === "event") {
      for (const handler of this.eventHandlers) {
        handler(decoded.event);
      }
      return;
    }
    this.settle(decoded.response);
  }

  private settle(response: KernelResponse): void {
    if (response.id === null || response.id === undefined) {
      return; // request-level parse errors have no continuation to find
    }
    const pending = this.pending.get(response.id);
    if (!pending) return;
    this.pending.delete(response.id);
    if (response.error) {
      pending.reject(new KernelRequestError(response.error.code, response.error.message));
    } else {
      pending.resolve(response.result);
    }
  }

  private handleClose(): void {
    if (this.closed) return;
    this.closed = true;
    for (const pending of this.pending.values()) {
      pending.reject(new Error(`connection closed (${pending.method})`));
    }
    this.pending.clear();
    for (const handler of this.closeHandlers) {
      handler();
    }
  }
}

/** Browser transport: a websocket to the bridge, one message per line. */
export class WebSocketTransport implements Transport {
  private lineHandlers: Array<(line: string) => void> = [];
  private closeHandlers: Array<() => void> = [];

  constructor(private socket: WebSocket) {
    socket.onmessage = (message) => {
      for (const piece of String(message.data).split("\n")) {
        if (!piece) continue;
        for (const handler of this.lineHandlers) handler(piece);
      }
    };
    socket.onclose = () => {
      for (const handler of this.closeHandlers) handler();
    };
  }

  send(line: string): void {
    this.socket.send(line + "\n");
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closeHandlers.push(handler);
  }

  close(): void {
    this.socket.close();
  }
}
