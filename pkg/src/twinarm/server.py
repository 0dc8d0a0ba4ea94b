"""Live teleoperation service: fixed-rate simulation loop, JSON console feed
over WebSocket, and a TCP port accepting binary tendon frames from a remote
demonstrator.

Console feed (one JSON object per message):

    outbound  {"type": "state", "t_us": ..., "seq": ...,
               "demo": {"theta": [3], "phi": [3]},
               "exec": {"theta": [3], "phi": [3]},
               "deviation": {"x": pct|null, "y": ..., "z": ...},
               "profile": "LLL", "scale": 1.0, "held": bool}
    inbound   {"type": "load", "s": float, "fx": float, "fy": float, "fz": float}
              {"type": "profile", "name": "LLL".."HHH"}
              {"type": "scale", "x": float}

Rejected inbound messages get {"type": "error", "message": ...}; applied
changes show up in the next state broadcast (the console renders
acknowledged state, never optimistic state).

Everything runs on one asyncio loop: the simulation step task, the console
sockets and the TCP ingest share state without locks.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import math
import os
from collections import deque

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import TwinConfig
from .kinematics import config_from_tendons, forward_kinematics
from .mapping import (
    PROFILE_NAMES,
    ScaleMapping,
    apply_stiffness_profile,
    deviation_metrics,
    map_tendons,
    executor_track,
    stiffness_moment,
)
from .protocol import FRAME_SIZE, FrameError, decode_frame
from .statics import ExternalLoad, backdrive_step, hold_check, rest_state

DEVIATION_WINDOW_S = 5.0
REMOTE_TIMEOUT_S = 0.5


class TwinHub:
    """Owns the demonstrator/executor state; single asyncio-loop writer."""

    def __init__(self, cfg: TwinConfig):
        self.cfg = cfg
        self.geom = cfg.geometry
        self.profile = cfg.profile
        self.scale = cfg.scale
        self.currents = apply_stiffness_profile(self.profile)
        self._hook = lambda c: stiffness_moment(c, self.profile)
        self.demo = rest_state(self.geom, self.geom.layout, cfg.friction,
                               self.currents, stiffness_hook=self._hook)
        self.executor = np.zeros(9)
        self.load: ExternalLoad | None = None
        self.seq = 0
        self.t_us = 0
        self.dt = 1.0 / cfg.rate_hz
        window = int(DEVIATION_WINDOW_S * cfg.rate_hz)
        self._demo_trail: deque = deque(maxlen=window)
        self._exec_trail: deque = deque(maxlen=window)
        self.remote_frame = None
        self.remote_age = math.inf

    # -- inbound operator messages ------------------------------------------

    def handle(self, msg: dict) -> dict | None:
        kind = msg.get("type")
        if kind == "load":
            try:
                s = float(msg["s"])
                force = (float(msg["fx"]), float(msg["fy"]), float(msg["fz"]))
            except (KeyError, TypeError, ValueError):
                return {"type": "error", "message": "load needs numeric s, fx, fy, fz"}
            if not 0.0 <= s <= self.geom.total_length:
                return {"type": "error", "message": f"load point {s} outside the arm"}
            if any(not math.isfinite(f) for f in force):
                return {"type": "error", "message": "load force must be finite"}
            self.load = None if force == (0.0, 0.0, 0.0) else ExternalLoad(s=s, force=force)
            return None
        if kind == "profile":
            name = str(msg.get("name", "")).upper()
            if name not in PROFILE_NAMES:
                return {"type": "error", "message": f"unknown profile {name!r}"}
            self.profile = self.profile.with_levels(name)
            self.currents = apply_stiffness_profile(self.profile)
            return None
        if kind == "scale":
            try:
                x = float(msg["x"])
            except (KeyError, TypeError, ValueError):
                return {"type": "error", "message": "scale needs a numeric x"}
            if not x > 0.0:
                return {"type": "error", "message": "scale must be positive"}
            self.scale = ScaleMapping(x)
            return None
        return {"type": "error", "message": f"unknown message type {kind!r}"}

    # -- simulation ----------------------------------------------------------

    def step(self) -> dict:
        """Advance one frame period and build the state broadcast."""
        if self.remote_frame is not None and self.remote_age <= REMOTE_TIMEOUT_S:
            demo_dl = np.asarray(self.remote_frame.displacements)
        else:
            loads = [self.load] if self.load is not None else []
            self.demo = backdrive_step(
                self.demo, loads, self.currents, self.dt, self.geom,
                self.geom.layout, self.cfg.friction, mobility=self.cfg.mobility,
                stiffness_hook=self._hook,
            )
            demo_dl = self.demo.displacements()
        self.remote_age += self.dt

        commanded = map_tendons(demo_dl, self.scale)
        self.executor = executor_track(commanded, self.executor, self.cfg.tracking, self.dt)

        demo_cfg, _ = config_from_tendons(demo_dl, self.geom.layout)
        exec_geom = self.geom.scaled(self.scale.factor)
        exec_cfg, _ = config_from_tendons(self.executor, exec_geom.layout)

        t_s = self.t_us / 1e6
        demo_tip = forward_kinematics(demo_cfg, self.geom).tip_position * self.scale.factor
        exec_tip = forward_kinematics(exec_cfg, exec_geom).tip_position
        self._demo_trail.append((t_s, demo_tip))
        self._exec_trail.append((t_s, exec_tip))

        held = hold_check(demo_cfg, self.currents, self.geom, self.geom.layout,
                          self.cfg.friction).held

        message = {
            "type": "state",
            "t_us": self.t_us,
            "seq": self.seq,
            "demo": {"theta": demo_cfg.thetas().tolist(), "phi": demo_cfg.phis().tolist()},
            "exec": {"theta": exec_cfg.thetas().tolist(), "phi": exec_cfg.phis().tolist()},
            "deviation": self._deviation(),
            "profile": self.profile.levels,
            "scale": self.scale.factor,
            "held": held,
        }
        self.seq += 1
        self.t_us += int(round(1e6 * self.dt))
        return message

    def _deviation(self) -> dict:
        if len(self._demo_trail) < 10:
            return {"x": None, "y": None, "z": None}
        demo_t = np.array([t for t, _ in self._demo_trail])
        demo_p = np.array([p for _, p in self._demo_trail])
        exec_t = np.array([t for t, _ in self._exec_trail])
        exec_p = np.array([p for _, p in self._exec_trail])
        report = deviation_metrics(demo_t, demo_p, exec_t, exec_p)
        return {
            axis: (None if math.isnan(value) else round(float(value), 3))
            for axis, value in zip("xyz", report.percent)
        }

    def feed_remote(self, frame) -> None:
        self.remote_frame = frame
        self.remote_age = 0.0


def create_app(cfg: TwinConfig, console_dir: str | None = None,
               frame_ingest_port: int | None = None):
    """FastAPI app exposing /ws plus optional static console files and
    (when frame_ingest_port is set) the TCP frame ingest."""
    hub = TwinHub(cfg)
    clients: set = set()

    async def sim_loop():
        loop = asyncio.get_running_loop()
        next_time = loop.time()
        while True:
            message = hub.step()
            if clients:
                text = json.dumps(message)
                dead = []
                for ws in clients:
                    try:
                        await ws.send_text(text)
                    except Exception:
                        dead.append(ws)
                for ws in dead:
                    clients.discard(ws)
            next_time += hub.dt
            delay = next_time - loop.time()
            if delay < -1.0:  # fell far behind (debugger, suspended VM)
                next_time = loop.time()
            await asyncio.sleep(max(delay, 0.0))

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        tasks = [asyncio.create_task(sim_loop())]
        if frame_ingest_port is not None:
            tasks.append(asyncio.create_task(_frame_ingest(hub, frame_ingest_port)))
        try:
            yield
        finally:
            for task in tasks:
                task.cancel()

    app = FastAPI(title="twinarm", lifespan=lifespan)
    app.state.hub = hub

    @app.websocket("/ws")
    async def console(ws: WebSocket):
        await ws.accept()
        clients.add(ws)
        try:
            while True:
                try:
                    msg = json.loads(await ws.receive_text())
                except json.JSONDecodeError:
                    await ws.send_text(json.dumps(
                        {"type": "error", "message": "messages must be JSON objects"}))
                    continue
                reply = hub.handle(msg if isinstance(msg, dict) else {})
                if reply is not None:
                    await ws.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass
        finally:
            clients.discard(ws)
            # a vanished operator must not keep pulling on the arm
            hub.load = None

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "seq": hub.seq}

    if console_dir and os.path.isdir(console_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=console_dir, html=True), name="console")

    return app, hub


async def _frame_ingest(hub: TwinHub, port: int):
    async def on_client(reader, writer):
        try:
            while True:
                try:
                    buf = await reader.readexactly(FRAME_SIZE)
                except asyncio.IncompleteReadError:
                    return
                try:
                    hub.feed_remote(decode_frame(buf))
                except FrameError:
                    continue  # resynchronization is the sender's problem
        finally:
            writer.close()

    server = await asyncio.start_server(on_client, host="127.0.0.1", port=port)
    async with server:
        await server.serve_forever()


def serve(cfg: TwinConfig, port: int = 7410, console_dir: str | None = None) -> None:
    """Run the session server: console feed on  ws://:port/ws, binary frame
    ingest on TCP port+1.  Blocks until interrupted."""
    import uvicorn

    app, _ = create_app(cfg, console_dir, frame_ingest_port=port + 1)

    print(f"console feed:  ws://127.0.0.1:{port}/ws")
    print(f"frame ingest:  tcp://127.0.0.1:{port + 1}")
    if console_dir:
        print(f"console UI:    http://127.0.0.1:{port}/")
    uvicorn.run(app, host="0.0.0.0", port=port, log_level="warning")
