import * as fs from "fs";
import { LineClient } from "./lineClient.js";
import { RamEnv } from "./env.js";

export interface BridgeConfig {
  host: string;
  port: number;
  episodes: number;
  maxSteps: number; // frame cap per episode
  stallThreshold: number; // unchanged frames before the watchdog forces a reset
  actions?: number[]; // restrict the declared action set (default: all)
  csvPath?: string;
  log?: (line: string) => void;
}

export interface EpisodeLog {
  episode: number;
  steps: number;
  agentGoals: number;
  opponentGoals: number;
  forcedReset: boolean;
}

export interface BridgeResult {
  episodes: EpisodeLog[];
  obsSent: number;
  actsReceived: number;
  stallResets: number;
}

export const CSV_HEADER =
  "episode,steps,agent_goals,opponent_goals,goal_diff,rolling30_diff," +
  "inner_rewards,l1_parsers,l2_vocab,wall_ms";

function sameBytes(a: number[], b: number[]): boolean {
  if (a.length !== b.length) return false;
  for (let i = 0; i < a.length; i++) if (a[i] !== b[i]) return false;
  return true;
}

/**
 * Drive a RAM environment against a remote agent server, one Act per Obs.
 *
 * The bridge is pure transport plus episode accounting: RAM bytes are
 * forwarded untouched, the returned action is applied to the environment,
 * and a watchdog forces a reset when the observation stays frozen past the
 * stall threshold (a known emulator anomaly).
 */
export async function runBridge(env: RamEnv, config: BridgeConfig): Promise<BridgeResult> {
  const actions = config.actions ?? Array.from({ length: env.actionCount }, (_, i) => i);
  const log = config.log ?? (() => undefined);
  const client = await LineClient.connect(config.host, config.port);
  const episodes: EpisodeLog[] = [];
  const csvLines = [CSV_HEADER];
  let obsSent = 0;
  let actsReceived = 0;
  let stallResets = 0;
  const rollingWindow: number[] = [];

  try {
    await client.hello(env.ramSize, 1, actions);

    for (let episode = 1; episode <= config.episodes; episode++) {
      const t0 = Date.now();
      let obs = env.reset();
      let prevObs = obs;
      let unchanged = 0;
      let lastAction = actions[0];
      let reward = 0;
      let done = false;
      let steps = 0;
      let agentGoals = 0;
      let opponentGoals = 0;
      let forcedReset = false;

      for (;;) {
        const act = await client.sendObs(obs, [lastAction], reward, done, steps);
        obsSent += 1;
        actsReceived += 1;
        if (done) break;
        if (steps >= config.maxSteps) {
          // frame cap: tell the server the episode is over on the next loop
          done = true;
          reward = 0;
          continue;
        }
        const chosen = actions[act.action_index];
        if (chosen === undefined) {
          throw new Error(`server chose action_index ${act.action_index} outside the declared set`);
        }
        const result = env.step(chosen);
        steps += 1;
        lastAction = chosen;
        if (result.reward > 0) agentGoals += 1;
        if (result.reward < 0) opponentGoals += 1;

        if (sameBytes(result.obs, prevObs)) {
          unchanged += 1;
          if (unchanged > config.stallThreshold) {
            // emulator stall: force a fresh episode and note the event
            stallResets += 1;
            forcedReset = true;
            log(`episode ${episode}: stall watchdog fired after ${unchanged} frozen frames`);
            obs = env.reset();
            prevObs = obs;
            unchanged = 0;
            reward = 0;
            done = true; // close out this episode on the next Obs
            continue;
          }
        } else {
          unchanged = 0;
        }
        prevObs = result.obs;
        obs = result.obs;
        reward = result.reward;
        done = result.done;
      }

      const goalDiff = agentGoals - opponentGoals;
      rollingWindow.push(goalDiff);
      if (rollingWindow.length > 30) rollingWindow.shift();
      const rolling = rollingWindow.reduce((s, v) => s + v, 0) / rollingWindow.length;
      const wallMs = Date.now() - t0;
      csvLines.push(
        `${episode},${steps},${agentGoals},${opponentGoals},${goalDiff},` +
          `${rolling},0,0,0,${wallMs}`,
      );
      episodes.push({ episode, steps, agentGoals, opponentGoals, forcedReset });
      log(`episode ${episode}: ${agentGoals}:${opponentGoals} over ${steps} frames`);
    }
    client.bye("episodes complete");
  } finally {
    client.close();
  }

  if (config.csvPath) {
    fs.writeFileSync(config.csvPath, csvLines.join("\n") + "\n", "utf8");
  }
  return { episodes, obsSent, actsReceived, stallResets };
}
