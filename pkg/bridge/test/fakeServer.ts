import * as net from "net";
import { PROTOCOL_VERSION, classify } from "../src/messages.js";

export interface FakeServerStats {
  hello: Record<string, unknown> | null;
  obsReceived: number;
  actsSent: number;
  unansweredObs: number; // nonzero would mean the client pipelined
}

/** Minimal agent server: acks Hello, answers every Obs with a cycling Act. */
export function startFakeServer(): Promise<{
  port: number;
  stats: FakeServerStats;
  close: () => Promise<void>;
}> {
  const stats: FakeServerStats = { hello: null, obsReceived: 0, actsSent: 0, unansweredObs: 0 };
  const server = net.createServer((socket) => {
    let buffer = "";
    socket.setEncoding("utf8");
    socket.on("data", (chunk: string) => {
      buffer += chunk;
      let idx;
      while ((idx = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, idx);
        buffer = buffer.slice(idx + 1);
        let msg: Record<string, unknown>;
        try {
          msg = JSON.parse(line);
        } catch {
          socket.write(JSON.stringify({ reason: "protocol error" }) + "\n");
          socket.end();
          return;
        }
        const kind = classify(msg);
        if (kind === "hello") {
          stats.hello = msg;
          if (msg["protocol_version"] !== PROTOCOL_VERSION) {
            socket.write(JSON.stringify({ reason: "version" }) + "\n");
            socket.end();
            return;
          }
          socket.write(JSON.stringify(msg) + "\n");
        } else if (kind === "obs") {
          stats.unansweredObs += 1;
          const actions = (stats.hello?.["actions"] as number[]) ?? [0];
          const index = stats.obsReceived % actions.length;
          stats.obsReceived += 1;
          socket.write(
            JSON.stringify({ action_index: index, actuator: [actions[index]] }) + "\n",
          );
          stats.actsSent += 1;
          stats.unansweredObs -= 1;
        } else if (kind === "bye") {
          socket.end();
        }
      }
    });
    socket.on("error", () => undefined);
  });
  return new Promise((resolve) => {
    server.listen(0, "127.0.0.1", () => {
      const address = server.address() as net.AddressInfo;
      resolve({
        port: address.port,
        stats,
        close: () => new Promise((done) => server.close(() => done())),
      });
    });
  });
}
