// Node-side transports: a raw TCP line transport (tests, tooling) so the
// connection logic can be exercised against a real kernel without a browser.

import net from "node:net";
import { Transport } from "./connection.js";

export class TcpLineTransport implements Transport {
  private lineHandlers: Array<(line: string) => void> = [];
  private closeHandlers: Array<() => void> = [];
  private buffered = "";

  constructor(private socket: net.Socket) {
    socket.on("data", (chunk) => {
      this.buffered += chunk.toString("utf-8");
      let newline;
      while ((newline = this.buffered.indexOf("\n")) >= 0) {
        const line = this.buffered.slice(0, newline);
        this.buffered = this.buffered.slice(newline + 1);
        for (const handler of this.lineHandlers) handler(line);
      }
    });
    socket.on("close", () => {
      for (const handler of this.closeHandlers) handler();
    });
    socket.on("error", () => {
      socket.destroy();
    });
  }

  static connect(host: string, port: number): Promise<TcpLineTransport> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port }, () =>
        resolve(new TcpLineTransport(socket)));
      socket.once("error", reject);
    });
  }

  send(line: string): void {
    this.socket.write(line + "\n");
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closeHandlers.push(handler);
  }

  close(): void {
    this.socket.end();
    this.socket.destroy();
  }
}
