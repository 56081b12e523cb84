// Wire schema: one JSON object per line, discriminated by its fields.
// Hello  { sensor_dim, actuator_dim, actions, protocol_version }
// Obs    { sensor, actuator, reward, done, step }
// Act    { action_index, actuator }
// Bye    { reason }
// action_index is the index into the Hello `actions` array.

export const PROTOCOL_VERSION = 1;

export interface Hello {
  sensor_dim: number;
  actuator_dim: number;
  actions: number[];
  protocol_version: number;
}

export interface Obs {
  sensor: number[];
  actuator: number[];
  reward: number;
  done: boolean;
  step: number;
}

export interface Act {
  action_index: number;
  actuator: number[];
}

export interface Bye {
  reason: string;
}

export type Message = Hello | Obs | Act | Bye;

export type MessageKind = "hello" | "obs" | "act" | "bye";

export function classify(msg: Record<string, unknown>): MessageKind {
  if ("sensor" in msg) return "obs";
  if ("sensor_dim" in msg) return "hello";
  if ("action_index" in msg) return "act";
  if ("reason" in msg) return "bye";
  throw new Error(`unclassifiable message with keys ${Object.keys(msg).join(",")}`);
}

export function encode(msg: Message): string {
  return JSON.stringify(msg) + "\n";
}
