"""Live gateway: runs a scenario in a worker thread, streams telemetry and
events over a WebSocket, and serves the cockpit's static assets.

Wire protocol (one JSON object per text message):
  client -> server: {"kind": "throttle"|"steering"|"aeb"|"mode"|"attack", "value": ...}
  server -> client: {"type": "telemetry", ...}, {"type": "alert", ...},
                    {"type": "event", "name": ..., "time_s": ...},
                    {"type": "reject", "reason": ...}

On connect the server replays the last 60 s of telemetry so a reloading
client reconstructs the same view.
"""

from __future__ import annotations

import asyncio
import json
import threading
import time
from collections import deque
from pathlib import Path
from typing import Optional

from aiohttp import WSMsgType, web

from .codec import Mode
from .scenario import RunContext, RunReport, ScenarioConfig, TelemetryRecord, run
from .teleop import CommandError, NotRunning, QueueSource, TelemetryFrame, parse_command_json

_MODE_NAMES = {Mode.MANUAL_AEB: "ManualAEB", Mode.AUTO_DRIVE: "AutoDrive"}

TELEMETRY_DECIMATION = 10  # every 10th 10 ms cycle -> 10 Hz


class SimServer:
    def __init__(self, config: ScenarioConfig, rate: float = 1.0,
                 out_dir: Optional[Path] = None):
        self.config = config
        self.rate = rate
        self.out_dir = out_dir
        self.commands = QueueSource()
        self.history: deque[str] = deque(maxlen=600)  # last 60 s at 10 Hz
        self.report: Optional[RunReport] = None
        self.sim_time_us = 0
        self._client_queues: set[asyncio.Queue] = set()
        self._loop: Optional[asyncio.AbstractEventLoop] = None
        self._wall_start: Optional[float] = None
        self._alert_count = 0
        self._flags = {"collision": False, "obstacle": False, "attack": False}
        self._latest_frame: Optional[TelemetryFrame] = None
        self._thread: Optional[threading.Thread] = None
        self.done = threading.Event()

    def telemetry_snapshot(self) -> TelemetryFrame:
        """Latest published cycle snapshot; never blocks the simulation."""
        if self._latest_frame is None:
            raise NotRunning("no control cycle has completed yet")
        return self._latest_frame

    # -- sim side (worker thread) -----------------------------------------

    def _on_cycle(self, record: TelemetryRecord, ctx: RunContext) -> None:
        t_us = round(record.time_s * 1_000_000)
        self.sim_time_us = t_us
        if self.rate > 0 and self._wall_start is not None:
            target = self._wall_start + record.time_s / self.rate
            delay = target - time.monotonic()
            if delay > 0:
                time.sleep(delay)

        for name, now in (("obstacle", record.obstacle),
                          ("attack", record.attack),
                          ("collision", record.collision)):
            if now and not self._flags[name]:
                event = {"obstacle": "obstacle_detected", "attack": "attack_started",
                         "collision": "collision"}[name]
                self._emit({"type": "event", "name": event, "time_s": record.time_s})
            if not now and self._flags[name] and name == "attack":
                self._emit({"type": "event", "name": "attack_stopped",
                            "time_s": record.time_s})
            self._flags[name] = now

        alerts = ctx.detector.alerts
        while self._alert_count < len(alerts):
            a = alerts[self._alert_count]
            self._alert_count += 1
            self._emit({"type": "alert", "time_s": a.time_us / 1_000_000,
                        "id_hex": f"{a.can_id:03X}", "reason": a.reason,
                        "observed_ms": a.observed_gap_ms,
                        "expected_ms": a.expected_gap_ms})

        util = ctx.bus.utilization(max(0, t_us - 1_000_000), t_us) if t_us > 0 else 0.0
        frame = TelemetryFrame(
            time_s=record.time_s,
            target_rpm=record.target_rpm,
            actual_rpm=record.actual_rpm,
            min_range_m=record.min_range_m,
            obstacle=record.obstacle,
            attack=record.attack,
            collision=record.collision,
            utilization_1s=util,
            mode=_MODE_NAMES[ctx.mcu.state.mode],
            aeb_enabled=ctx.mcu.state.aeb_enabled,
        )
        self._latest_frame = frame
        if t_us % (TELEMETRY_DECIMATION * 10_000) == 0:
            text = frame.to_json()
            self.history.append(text)
            self._send_text(text)

    def _emit(self, obj: dict) -> None:
        self._send_text(json.dumps(obj, separators=(",", ":")))

    def _send_text(self, text: str) -> None:
        loop = self._loop
        if loop is not None and not loop.is_closed():
            loop.call_soon_threadsafe(self._broadcast, text)

    def _broadcast(self, text: str) -> None:
        for queue in list(self._client_queues):
            queue.put_nowait(text)

    def _sim_main(self) -> None:
        self._wall_start = time.monotonic()
        try:
            self.report = run(self.config, command_source=self.commands,
                              on_cycle=self._on_cycle)
            if self.out_dir is not None:
                self.out_dir.mkdir(parents=True, exist_ok=True)
                (self.out_dir / "candump.log").write_text(self.report.candump)
                (self.out_dir / "telemetry.csv").write_text(self.report.telemetry_csv())
                (self.out_dir / "alerts.csv").write_text(self.report.alerts_csv())
        finally:
            self.done.set()

    def start(self) -> None:
        self._thread = threading.Thread(target=self._sim_main, name="hackcar-sim", daemon=True)
        self._thread.start()

    # -- web side ----------------------------------------------------------

    def make_app(self, static_dir: Optional[Path] = None) -> web.Application:
        app = web.Application()
        app.router.add_get("/ws", self._handle_ws)
        if static_dir is not None and static_dir.is_dir():
            app.router.add_get("/", lambda req: _file_or_404(static_dir / "index.html"))
            app.router.add_static("/", static_dir)
        app.on_startup.append(self._on_startup)
        return app

    async def _on_startup(self, app: web.Application) -> None:
        self._loop = asyncio.get_running_loop()
        if self._thread is None:
            self.start()

    async def _handle_ws(self, request: web.Request) -> web.WebSocketResponse:
        ws = web.WebSocketResponse(heartbeat=30)
        await ws.prepare(request)
        # queue history then register without yielding, so a broadcast can
        # neither slip between the two nor interleave with the replay
        queue: asyncio.Queue[str] = asyncio.Queue()
        for text in list(self.history):
            queue.put_nowait(text)
        self._client_queues.add(queue)
        pump = asyncio.ensure_future(self._pump(ws, queue))
        try:
            async for msg in ws:
                if msg.type != WSMsgType.TEXT:
                    continue
                try:
                    command = parse_command_json(msg.data, self.sim_time_us)
                except CommandError as exc:
                    queue.put_nowait(json.dumps(
                        {"type": "reject", "reason": str(exc)},
                        separators=(",", ":")))
                    continue
                self.commands.push(command)
        finally:
            self._client_queues.discard(queue)
            pump.cancel()
        return ws

    @staticmethod
    async def _pump(ws: web.WebSocketResponse, queue: asyncio.Queue) -> None:
        try:
            while not ws.closed:
                await ws.send_str(await queue.get())
        except (asyncio.CancelledError, ConnectionResetError):
            pass


def _file_or_404(path: Path) -> web.StreamResponse:
    if path.is_file():
        return web.FileResponse(path)
    raise web.HTTPNotFound(text="cockpit assets not built; run npm build in frontend/")


def serve(config: ScenarioConfig, host: str, port: int,
          static_dir: Optional[Path], rate: float,
          out_dir: Optional[Path] = None) -> None:
    server = SimServer(config, rate=rate, out_dir=out_dir)
    app = server.make_app(static_dir)
    print(f"serving cockpit on http://{host}:{port}/ (ws at /ws), rate={rate}x")
    web.run_app(app, host=host, port=port)
