// Cockpit entry point: WebSocket lifecycle, DOM bindings, render loop.

import { drawRpmTraces, drawSparkline } from "./charts";
import { ControlInput } from "./controls";
import { aebCommand, attackCommand, modeCommand, parseServerMessage } from "./protocol";
import { UiSessionState } from "./session";

const state = new UiSessionState();
const controls = new ControlInput();
let socket: WebSocket | null = null;

function wsUrl(): string {
  const proto = location.protocol === "https:" ? "wss:" : "ws:";
  return `${proto}//${location.host}/ws`;
}

function connect(): void {
  socket = new WebSocket(wsUrl());
  socket.onopen = () => {
    state.onConnect();
    syncConnectedUi();
  };
  socket.onclose = () => {
    state.onDisconnect();
    syncConnectedUi();
  };
  socket.onmessage = (ev) => {
    const msg = parseServerMessage(String(ev.data));
    if (msg) state.applyMessage(msg);
  };
}

function send(text: string): void {
  if (socket && socket.readyState === WebSocket.OPEN) socket.send(text);
}

// -- DOM ---------------------------------------------------------------

const $ = (id: string) => document.getElementById(id)!;

function syncConnectedUi(): void {
  document.body.classList.toggle("disconnected", !state.connected);
  ($("reconnect") as HTMLButtonElement).hidden = state.connected;
  for (const el of document.querySelectorAll<HTMLButtonElement | HTMLInputElement>(".needs-live")) {
    el.disabled = !state.connected;
  }
}

function bindControls(): void {
  $("reconnect").addEventListener("click", connect);
  $("aeb-on").addEventListener("click", () => send(aebCommand(true)));
  $("aeb-off").addEventListener("click", () => send(aebCommand(false)));
  $("mode-manual").addEventListener("click", () => send(modeCommand("ManualAEB")));
  $("mode-auto").addEventListener("click", () => send(modeCommand("AutoDrive")));
  $("attack-start").addEventListener("click", () => send(attackCommand(true)));
  $("attack-stop").addEventListener("click", () => send(attackCommand(false)));

  const throttleSlider = $("throttle") as HTMLInputElement;
  const steeringSlider = $("steering") as HTMLInputElement;
  throttleSlider.addEventListener("input", () => controls.setThrottle(Number(throttleSlider.value)));
  steeringSlider.addEventListener("input", () => controls.setSteering(Number(steeringSlider.value)));

  document.addEventListener("keydown", (ev) => {
    if (ev.repeat) return;
    controls.keyDown(ev.code);
  });
  document.addEventListener("keyup", (ev) => controls.keyUp(ev.code));

  // 20 Hz command pump; sliders reflect keyboard ramps
  setInterval(() => {
    for (const cmd of controls.poll(performance.now())) send(cmd);
    throttleSlider.value = String(controls.throttle);
    steeringSlider.value = String(controls.steering);
  }, 50);
}

function renderLoop(): void {
  const traces = $("traces") as HTMLCanvasElement;
  const spark = $("spark") as HTMLCanvasElement;
  const tctx = traces.getContext("2d")!;
  const sctx = spark.getContext("2d")!;

  const frame = () => {
    drawRpmTraces(tctx, traces.width, traces.height, state);
    drawSparkline(sctx, spark.width, spark.height,
                  state.utilization.times, state.utilization.values, 0.1);

    const latest = state.latest;
    $("range-readout").textContent = latest ? `${latest.min_range_m.toFixed(2)} m` : "--";
    $("rpm-readout").textContent = latest
      ? `${Math.round(latest.actual_rpm)} / ${Math.round(latest.target_rpm)}`
      : "-- / --";
    $("util-readout").textContent = latest
      ? `${(latest.utilization_1s * 100).toFixed(2)}%`
      : "--";
    $("mode-readout").textContent = latest ? latest.mode : "--";
    $("aeb-readout").textContent = latest ? (latest.aeb_enabled ? "AEB on" : "AEB off") : "";
    $("clock-readout").textContent = latest ? `t=${latest.time_s.toFixed(1)} s` : "";

    document.body.classList.toggle("attack-live", Boolean(latest && latest.attack));
    ($("collision-banner") as HTMLElement).hidden = !state.collided;

    const feed = $("alert-feed");
    const items = state.alerts.slice(-8).reverse().map((a) =>
      `<li>t=${a.time_s.toFixed(3)} id=0x${a.id_hex} ${a.reason} ` +
      `(${a.observed_ms.toFixed(2)} ms, expected ${a.expected_ms.toFixed(0)} ms)</li>`);
    feed.innerHTML = items.join("");

    const rejects = $("reject-feed");
    rejects.textContent = state.rejections.length
      ? `rejected: ${state.rejections[state.rejections.length - 1]}`
      : "";

    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

bindControls();
connect();
renderLoop();
