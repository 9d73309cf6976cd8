import { describe, expect, it } from "vitest";

import { ControlInput } from "../src/controls";

describe("ControlInput", () => {
  it("held up-arrow produces a stream of rising throttle commands", () => {
    const input = new ControlInput();
    input.keyDown("ArrowUp");
    const values: number[] = [];
    for (let tick = 0; tick < 10; tick++) {
      for (const cmd of input.poll(tick * 50)) {
        const obj = JSON.parse(cmd);
        if (obj.kind === "throttle") values.push(obj.value);
      }
    }
    expect(values.length).toBe(10);
    for (let i = 1; i < values.length; i++) {
      expect(values[i]).toBeGreaterThan(values[i - 1]);
    }
    expect(Math.max(...values)).toBeLessThanOrEqual(100);
  });

  it("deduplicates unchanged values", () => {
    const input = new ControlInput();
    input.setThrottle(40);
    expect(input.poll(0).length).toBe(1);
    expect(input.poll(50).length).toBe(0);
    expect(input.poll(100).length).toBe(0);
    input.setThrottle(45);
    expect(input.poll(150).length).toBe(1);
  });

  it("rate-limits each kind to 20 Hz", () => {
    const input = new ControlInput();
    input.setThrottle(10);
    expect(input.poll(0).length).toBe(1);
    input.setThrottle(20);
    expect(input.poll(10).length).toBe(0); // 10 ms after last send: suppressed
    expect(input.poll(51).length).toBe(1);
  });

  it("steering recenters when keys are released", () => {
    const input = new ControlInput();
    input.keyDown("ArrowLeft");
    for (let tick = 0; tick < 5; tick++) input.poll(tick * 50);
    expect(input.steering).toBeGreaterThan(0);
    input.keyUp("ArrowLeft");
    for (let tick = 5; tick < 30; tick++) input.poll(tick * 50);
    expect(input.steering).toBe(0);
  });

  it("slider input clamps to the wire range", () => {
    const input = new ControlInput();
    input.setThrottle(250);
    expect(input.throttle).toBe(100);
    input.setSteering(-250);
    expect(input.steering).toBe(-100);
    const cmds = input.poll(0);
    expect(cmds.length).toBe(2); // both within range, both sendable
  });
});
