import * as net from "net";
import { Act, Bye, Hello, Message, PROTOCOL_VERSION, classify, encode } from "./messages.js";

/** Strict-lockstep newline-JSON client: every sent line waits for its reply. */
export class LineClient {
  private socket: net.Socket;
  private buffer = "";
  private waiter: ((line: string) => void) | null = null;
  private pending: string[] = [];
  private closed = false;

  private constructor(socket: net.Socket) {
    this.socket = socket;
    socket.setEncoding("utf8");
    socket.on("data", (chunk: string) => {
      this.buffer += chunk;
      let idx;
      while ((idx = this.buffer.indexOf("\n")) >= 0) {
        const line = this.buffer.slice(0, idx);
        this.buffer = this.buffer.slice(idx + 1);
        if (this.waiter) {
          const w = this.waiter;
          this.waiter = null;
          w(line);
        } else {
          this.pending.push(line);
        }
      }
    });
    socket.on("close", () => {
      this.closed = true;
      if (this.waiter) {
        const w = this.waiter;
        this.waiter = null;
        w("");
      }
    });
    socket.on("error", () => {
      /* surfaced through the close path */
    });
  }

  static connect(host: string, port: number, timeoutMs = 10_000): Promise<LineClient> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port });
      const timer = setTimeout(() => {
        socket.destroy();
        reject(new Error(`connect timeout to ${host}:${port}`));
      }, timeoutMs);
      socket.once("connect", () => {
        clearTimeout(timer);
        resolve(new LineClient(socket));
      });
      socket.once("error", (err) => {
        clearTimeout(timer);
        reject(err);
      });
    });
  }

  private readLine(timeoutMs: number): Promise<string> {
    if (this.pending.length > 0) {
      return Promise.resolve(this.pending.shift()!);
    }
    if (this.closed) return Promise.resolve("");
    return new Promise((resolve, reject) => {
      const timer = setTimeout(() => {
        this.waiter = null;
        reject(new Error("reply timeout"));
      }, timeoutMs);
      this.waiter = (line) => {
        clearTimeout(timer);
        resolve(line);
      };
    });
  }

  async request(msg: Message, timeoutMs = 30_000): Promise<Record<string, unknown>> {
    if (this.closed) throw new Error("connection closed");
    this.socket.write(encode(msg));
    const line = await this.readLine(timeoutMs);
    if (line === "") throw new Error("server disconnected");
    return JSON.parse(line) as Record<string, unknown>;
  }

  async hello(sensorDim: number, actuatorDim: number, actions: number[]): Promise<void> {
    const msg: Hello = {
      sensor_dim: sensorDim,
      actuator_dim: actuatorDim,
      actions,
      protocol_version: PROTOCOL_VERSION,
    };
    const reply = await this.request(msg);
    const kind = classify(reply);
    if (kind === "bye") {
      throw new Error(`server refused session: ${(reply as unknown as Bye).reason}`);
    }
    if (kind !== "hello") throw new Error("expected Hello ack");
  }

  async sendObs(
    sensor: number[],
    actuator: number[],
    reward: number,
    done: boolean,
    step: number,
  ): Promise<Act> {
    const reply = await this.request({ sensor, actuator, reward, done, step });
    const kind = classify(reply);
    if (kind === "bye") {
      throw new Error(`server closed session: ${(reply as unknown as Bye).reason}`);
    }
    if (kind !== "act") throw new Error("expected Act");
    return reply as unknown as Act;
  }

  bye(reason = "done"): void {
    if (!this.closed) {
      this.socket.write(encode({ reason }));
    }
  }

  close(): void {
    this.socket.end();
    this.socket.destroy();
  }
}
