import { describe, expect, it } from "vitest";

import { TimeSeries } from "../src/buffers";
import { ServerMsg, TelemetryMsg } from "../src/protocol";
import { UiSessionState } from "../src/session";

function telemetry(timeS: number, extra: Partial<TelemetryMsg> = {}): TelemetryMsg {
  return {
    type: "telemetry",
    time_s: timeS,
    target_rpm: 6000,
    actual_rpm: 5990,
    min_range_m: 10,
    obstacle: false,
    attack: false,
    collision: false,
    utilization_1s: 0.0464,
    mode: "AutoDrive",
    aeb_enabled: true,
    ...extra,
  };
}

describe("TimeSeries", () => {
  it("keeps only the rolling window", () => {
    const series = new TimeSeries(60);
    for (let i = 0; i <= 1200; i++) series.push(i / 10, i / 10);
    expect(series.times[0]).toBeGreaterThanOrEqual(60);
    expect(series.times[series.times.length - 1]).toBe(120);
    expect(series.latest()).toBe(120);
  });

  it("stays time-ordered and drops out-of-order strays", () => {
    const series = new TimeSeries(60);
    series.push(1, 10);
    series.push(2, 20);
    series.push(1.5, 99); // stray
    expect(series.times).toEqual([1, 2]);
    series.push(2, 25); // same stamp: overwrite
    expect(series.values).toEqual([10, 25]);
  });
});

describe("UiSessionState", () => {
  it("telemetry fills buffers and latest", () => {
    const state = new UiSessionState();
    state.onConnect();
    state.applyMessage(telemetry(0.1));
    state.applyMessage(telemetry(0.2, { actual_rpm: 6100 }));
    expect(state.latest!.time_s).toBe(0.2);
    expect(state.actualRpm.values).toEqual([5990, 6100]);
    expect(state.utilization.length).toBe(2);
  });

  it("attack events open and close spans; markers come only from events", () => {
    const state = new UiSessionState();
    state.onConnect();
    state.applyMessage(telemetry(1.0, { attack: true, obstacle: true }));
    // telemetry flags alone never create markers or spans
    expect(state.attackSpans).toEqual([]);
    expect(state.markers).toEqual([]);

    state.applyMessage({ type: "event", name: "attack_started", time_s: 25.2 });
    expect(state.attackSpans).toEqual([{ startS: 25.2, endS: null }]);
    state.applyMessage({ type: "event", name: "attack_stopped", time_s: 55.0 });
    expect(state.attackSpans).toEqual([{ startS: 25.2, endS: 55.0 }]);

    state.applyMessage({ type: "event", name: "obstacle_detected", time_s: 30.2 });
    state.applyMessage({ type: "event", name: "collision", time_s: 31.0 });
    expect(state.markers.map((m) => m.kind)).toEqual(["obstacle_detected", "collision"]);
    expect(state.collided).toBe(true);
  });

  it("alert feed is capped", () => {
    const state = new UiSessionState();
    state.onConnect();
    for (let i = 0; i < 80; i++) {
      state.applyMessage({
        type: "alert", time_s: i, id_hex: "400",
        reason: "inter-arrival-anomaly", observed_ms: 0.3, expected_ms: 10,
      });
    }
    expect(state.alerts.length).toBe(50);
    expect(state.alerts[state.alerts.length - 1].time_s).toBe(79);
  });

  it("rejections are recorded", () => {
    const state = new UiSessionState();
    state.onConnect();
    state.applyMessage({ type: "reject", reason: "throttle 150.0 outside 0..100" });
    expect(state.rejections).toHaveLength(1);
  });

  it("replaying the same history reproduces the same view", () => {
    const history: ServerMsg[] = [
      telemetry(0.1),
      { type: "event", name: "attack_started", time_s: 0.15 },
      telemetry(0.2, { attack: true }),
      {
        type: "alert", time_s: 0.21, id_hex: "400",
        reason: "inter-arrival-anomaly", observed_ms: 0.35, expected_ms: 10,
      },
      telemetry(0.3, { attack: true, actual_rpm: 5800 }),
    ];
    const a = new UiSessionState();
    a.onConnect();
    const b = new UiSessionState();
    b.onConnect();
    for (const msg of history) a.applyMessage(msg);
    // b had stale state from a previous connection, then reconnects
    b.applyMessage(telemetry(99));
    b.onConnect();
    for (const msg of history) b.applyMessage(msg);
    expect(JSON.stringify(a)).toBe(JSON.stringify(b));
  });

  it("disconnect greys the view but keeps history", () => {
    const state = new UiSessionState();
    state.onConnect();
    state.applyMessage(telemetry(0.1));
    state.onDisconnect();
    expect(state.connected).toBe(false);
    expect(state.actualRpm.length).toBe(1);
  });
});
