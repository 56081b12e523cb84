// End-to-end against the real agent server (the Python package in this
// repository), exercising the actual TCP surface rather than the test stub.

import { spawn } from "child_process";
import * as net from "net";
import { describe, expect, it } from "vitest";
import { FakeRamEnv } from "../src/env.js";
import { runBridge } from "../src/bridge.js";

function freePort(): Promise<number> {
  return new Promise((resolve) => {
    const srv = net.createServer();
    srv.listen(0, "127.0.0.1", () => {
      const port = (srv.address() as net.AddressInfo).port;
      srv.close(() => resolve(port));
    });
  });
}

function waitForPort(port: number, timeoutMs = 20_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  return new Promise((resolve, reject) => {
    const attempt = () => {
      const sock = net.createConnection({ host: "127.0.0.1", port });
      sock.once("connect", () => {
        sock.destroy();
        resolve();
      });
      sock.once("error", () => {
        sock.destroy();
        if (Date.now() > deadline) reject(new Error("server never came up"));
        else setTimeout(attempt, 100);
      });
    };
    attempt();
  });
}

describe("bridge against the real agent server", () => {
  it("runs 2 episodes of RAM frames through a live session", async () => {
    const port = await freePort();
    const proc = spawn(
      "python3",
      ["-m", "hypercol.cli", "serve", "--port", String(port), "--sessions", "0",
       "--out", "/tmp/bridge-integration",
       "--set", "p=4", "--set", "m=8", "--set", "unique_limit=30",
       "--set", "clusters=8"],
      { stdio: ["ignore", "pipe", "pipe"] },
    );
    try {
      await waitForPort(port);
      const env = new FakeRamEnv({ seed: 9, episodeFrames: 60 });
      const result = await runBridge(env, {
        host: "127.0.0.1",
        port,
        episodes: 2,
        maxSteps: 18000,
        stallThreshold: 500,
      });
      expect(result.episodes.length).toBe(2);
      expect(result.obsSent).toBe(result.actsReceived);
      expect(result.episodes.every((e) => e.steps === 60)).toBe(true);
    } finally {
      proc.kill("SIGINT");
      await new Promise((resolve) => proc.once("exit", resolve));
    }
  }, 60_000);
});
