// Websocket-to-TCP relay for the browser workbench. A thin pipe with no
// protocol knowledge: websocket messages go to the kernel socket with a
// newline, kernel bytes come back re-framed one line per message.

import net from "node:net";
import process from "node:process";
import { WebSocketServer, WebSocket } from "ws";

export interface BridgeOptions {
  listenPort: number;
  kernelHost: string;
  kernelPort: number;
}

export function startBridge(options: BridgeOptions): WebSocketServer {
  const server = new WebSocketServer({ port: options.listenPort });
  server.on("connection", (client: WebSocket) => {
    const kernel = net.createConnection({
      host: options.kernelHost,
      port: options.kernelPort,
    });
    let buffered = "";
    kernel.on("data", (chunk) => {
      buffered += chunk.toString("utf-8");
      let newline;
      while ((newline = buffered.indexOf("\n")) >= 0) {
        const line = buffered.slice(0, newline);
        buffered = buffered.slice(newline + 1);
        if (line) client.send(line);
      }
    });
    kernel.on("close", () => client.close());
    kernel.on("error", () => client.close());
    client.on("message", (data) => {
      const text = data.toString();
      kernel.write(text.endsWith("\n") ? text : text + "\n");
    });
    client.on("close", () => kernel.destroy());
  });
  return server;
}

function parseArgs(argv: string[]): BridgeOptions {
  const options: BridgeOptions = {
    listenPort: 8787,
    kernelHost: "127.0.0.1",
    kernelPort: 9800,
  };
  for (let i = 0; i < argv.length; i += 1) {
    switch (argv[i]) {
      case "--listen":
        options.listenPort = Number(argv[++i]);
        break;
      case "--kernel-host":
        options.kernelHost = argv[++i];
        break;
      case "--kernel-port":
        options.kernelPort = Number(argv[++i]);
        break;
      default:
        throw new Error(`unknown argument ${argv[i]}`);
    }
  }
  return options;
}

const isMain = process.argv[1]?.endsWith("bridge.js");
if (isMain) {
  const options = parseArgs(process.argv.slice(2));
  startBridge(options);
  console.log(
    `bridge listening on ws://127.0.0.1:${options.listenPort}, ` +
    `kernel at ${options.kernelHost}:${options.kernelPort}`);
}
