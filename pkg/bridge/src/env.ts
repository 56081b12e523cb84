// RAM-observation environment surface the bridge drives. The built-in fake
// implementation stands in for an Atari emulator in tests and offline runs;
// a real emulator binding just has to implement RamEnv.

export interface StepResult {
  obs: number[];
  reward: number;
  done: boolean;
}

export interface RamEnv {
  readonly ramSize: number;
  readonly actionCount: number;
  reset(): number[];
  step(action: number): StepResult;
}

export interface FakeRamEnvOptions {
  seed?: number;
  episodeFrames?: number; // frames per episode before done
  rewardEvery?: number; // a +/-1 reward every N frames
  stallAfterEpisode?: number; // inject one stall when this episode would end
  stallFrames?: number; // how long the screen stays frozen
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Deterministic 128-byte RAM stub with an optional emulator-stall fault. */
export class FakeRamEnv implements RamEnv {
  readonly ramSize = 128;
  readonly actionCount = 6;

  private rng: () => number;
  private opts: Required<FakeRamEnvOptions>;
  private episode = 0;
  private frame = 0;
  private ram: number[] = [];
  private stallLeft = 0;
  private stallUsed = false;

  constructor(options: FakeRamEnvOptions = {}) {
    this.opts = {
      seed: options.seed ?? 0,
      episodeFrames: options.episodeFrames ?? 40,
      rewardEvery: options.rewardEvery ?? 7,
      stallAfterEpisode: options.stallAfterEpisode ?? -1,
      stallFrames: options.stallFrames ?? 0,
    };
    this.rng = mulberry32(this.opts.seed);
  }

  reset(): number[] {
    this.episode += 1;
    this.frame = 0;
    this.stallLeft = 0;
    this.ram = this.renderRam();
    return [...this.ram];
  }

  private renderRam(): number[] {
    const out = new Array<number>(this.ramSize);
    for (let i = 0; i < this.ramSize; i++) {
      out[i] = (i * 31 + this.episode * 17 + this.frame * 13 + Math.floor(this.rng() * 7)) % 256;
    }
    return out;
  }

  step(action: number): StepResult {
    if (action < 0 || action >= this.actionCount || !Number.isInteger(action)) {
      throw new Error(`invalid action ${action}`);
    }
    if (this.stallLeft > 0) {
      // the emulator is wedged: same bytes, no reward, no done
      this.stallLeft -= 1;
      return { obs: [...this.ram], reward: 0, done: false };
    }
    this.frame += 1;
    const atEnd = this.frame >= this.opts.episodeFrames;
    if (atEnd && this.episode === this.opts.stallAfterEpisode && !this.stallUsed) {
      this.stallUsed = true;
      this.stallLeft = this.opts.stallFrames;
      return { obs: [...this.ram], reward: 0, done: false };
    }
    this.ram = this.renderRam();
    let reward = 0;
    if (this.frame % this.opts.rewardEvery === 0) {
      reward = this.rng() < 0.5 ? 1 : -1;
    }
    return { obs: [...this.ram], reward, done: atEnd };
  }
}
