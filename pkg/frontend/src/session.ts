// Client-side session state. The cockpit renders only what the server
// sent: buffers are rebuilt from the history replay on every (re)connect,
// and event markers come exclusively from server event messages.

import { TimeSeries } from "./buffers";
import { AlertMsg, EventMsg, ServerMsg, TelemetryMsg } from "./protocol";

export interface Marker {
  kind: "obstacle_detected" | "collision";
  timeS: number;
}

export interface AttackSpan {
  startS: number;
  endS: number | null; // null while the attack is still running
}

const HISTORY_WINDOW_S = 60;
const ALERT_FEED_MAX = 50;

export class UiSessionState {
  connected = false;
  latest: TelemetryMsg | null = null;
  targetRpm = new TimeSeries(HISTORY_WINDOW_S);
  actualRpm = new TimeSeries(HISTORY_WINDOW_S);
  minRange = new TimeSeries(HISTORY_WINDOW_S);
  utilization = new TimeSeries(HISTORY_WINDOW_S);
  attackSpans: AttackSpan[] = [];
  markers: Marker[] = [];
  alerts: AlertMsg[] = [];
  rejections: string[] = [];
  collided = false;

  onConnect(): void {
    // the server replays the last 60 s on connect; start from a clean slate
    this.connected = true;
    this.latest = null;
    this.targetRpm.clear();
    this.actualRpm.clear();
    this.minRange.clear();
    this.utilization.clear();
    this.attackSpans = [];
    this.markers = [];
    this.alerts = [];
    this.rejections = [];
    this.collided = false;
  }

  onDisconnect(): void {
    this.connected = false;
  }

  applyMessage(msg: ServerMsg): void {
    switch (msg.type) {
      case "telemetry":
        this.applyTelemetry(msg);
        break;
      case "alert":
        this.alerts.push(msg);
        if (this.alerts.length > ALERT_FEED_MAX) {
          this.alerts.splice(0, this.alerts.length - ALERT_FEED_MAX);
        }
        break;
      case "event":
        this.applyEvent(msg);
        break;
      case "reject":
        this.rejections.push(msg.reason);
        if (this.rejections.length > 10) this.rejections.shift();
        break;
    }
  }

  private applyTelemetry(msg: TelemetryMsg): void {
    this.latest = msg;
    this.targetRpm.push(msg.time_s, msg.target_rpm);
    this.actualRpm.push(msg.time_s, msg.actual_rpm);
    this.minRange.push(msg.time_s, msg.min_range_m);
    this.utilization.push(msg.time_s, msg.utilization_1s);
  }

  private applyEvent(msg: EventMsg): void {
    switch (msg.name) {
      case "attack_started": {
        const open = this.attackSpans[this.attackSpans.length - 1];
        if (!open || open.endS !== null) {
          this.attackSpans.push({ startS: msg.time_s, endS: null });
        }
        break;
      }
      case "attack_stopped": {
        const open = this.attackSpans[this.attackSpans.length - 1];
        if (open && open.endS === null) open.endS = msg.time_s;
        break;
      }
      case "obstacle_detected":
        this.markers.push({ kind: "obstacle_detected", timeS: msg.time_s });
        break;
      case "collision":
        this.markers.push({ kind: "collision", timeS: msg.time_s });
        this.collided = true;
        break;
    }
  }
}
