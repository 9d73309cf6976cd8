// Keyboard and slider input mapped to throttle/steering command streams,
// rate-limited to 20 Hz per command kind and deduplicated on value.

import { steeringCommand, throttleCommand } from "./protocol";

const MIN_INTERVAL_MS = 50; // <= 20 Hz per kind
const THROTTLE_STEP = 2.5; // per poll while a key is held
const STEER_STEP = 5.0;
const STEER_RECENTER = 8.0;

export class ControlInput {
  throttle = 0;
  steering = 0;
  private keys = new Set<string>();
  // the sim starts centered at zero, so zero counts as already sent
  private lastSent: Record<string, { value: number; atMs: number }> = {
    throttle: { value: 0, atMs: -Infinity },
    steering: { value: 0, atMs: -Infinity },
  };

  keyDown(code: string): void {
    this.keys.add(code);
  }

  keyUp(code: string): void {
    this.keys.delete(code);
  }

  setThrottle(pct: number): void {
    this.throttle = clamp(pct, 0, 100);
  }

  setSteering(pct: number): void {
    this.steering = clamp(pct, -100, 100);
  }

  /** Advance held-key ramps and return the wire messages due this poll. */
  poll(nowMs: number): string[] {
    if (this.keys.has("ArrowUp")) this.throttle = clamp(this.throttle + THROTTLE_STEP, 0, 100);
    if (this.keys.has("ArrowDown")) this.throttle = clamp(this.throttle - THROTTLE_STEP, 0, 100);
    const left = this.keys.has("ArrowLeft");
    const right = this.keys.has("ArrowRight");
    if (left && !right) this.steering = clamp(this.steering + STEER_STEP, -100, 100);
    if (right && !left) this.steering = clamp(this.steering - STEER_STEP, -100, 100);
    if (!left && !right && this.steering !== 0) {
      // no steering key held: drift back to center
      const sign = Math.sign(this.steering);
      this.steering = clamp(this.steering - sign * STEER_RECENTER, -100, 100);
      if (Math.sign(this.steering) !== sign) this.steering = 0;
    }

    const out: string[] = [];
    if (this.due("throttle", this.throttle, nowMs)) out.push(throttleCommand(this.throttle));
    if (this.due("steering", this.steering, nowMs)) out.push(steeringCommand(this.steering));
    return out;
  }

  private due(kind: string, value: number, nowMs: number): boolean {
    const prev = this.lastSent[kind];
    if (prev && prev.value === value) return false;
    if (prev && nowMs - prev.atMs < MIN_INTERVAL_MS) return false;
    this.lastSent[kind] = { value, atMs: nowMs };
    return true;
  }
}

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(Math.max(v, lo), hi);
}
