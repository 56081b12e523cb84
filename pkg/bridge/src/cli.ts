#!/usr/bin/env node
// gym-socket-bridge --host 127.0.0.1 --port 7878 --episodes 5 [--env fake]
// Only the offline fake RAM environment ships here; real emulator bindings
// implement the RamEnv interface and plug into runBridge the same way.

import { FakeRamEnv } from "./env.js";
import { runBridge } from "./bridge.js";

interface Args {
  [key: string]: string;
}

function parseArgs(argv: string[]): Args {
  const out: Args = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg.startsWith("--")) {
      out[arg.slice(2)] = argv[i + 1] ?? "";
      i++;
    }
  }
  return out;
}

async function main(): Promise<number> {
  const args = parseArgs(process.argv.slice(2));
  const envName = args["env"] ?? "fake";
  if (envName !== "fake") {
    console.error(`unknown environment '${envName}' (only 'fake' is built in)`);
    return 2;
  }
  const env = new FakeRamEnv({
    seed: Number(args["seed"] ?? 0),
    episodeFrames: Number(args["episode-frames"] ?? 500),
  });
  const actions = args["actions"]
    ? args["actions"].split(",").map((s) => Number(s.trim()))
    : undefined;
  const result = await runBridge(env, {
    host: args["host"] ?? "127.0.0.1",
    port: Number(args["port"] ?? process.env.HYPERCOL_PORT ?? 7878),
    episodes: Number(args["episodes"] ?? 5),
    maxSteps: Number(args["max-steps"] ?? 18000),
    stallThreshold: Number(args["stall-threshold"] ?? 500),
    actions,
    csvPath: args["csv"],
    log: (line) => console.error(line),
  });
  console.log(
    JSON.stringify({
      episodes: result.episodes.length,
      obs: result.obsSent,
      acts: result.actsReceived,
      stall_resets: result.stallResets,
    }),
  );
  return 0;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(String(err));
    process.exit(1);
  },
);
