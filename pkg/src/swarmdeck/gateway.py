"""Run orchestration: the simulation loop, logging, and replay wiring.

Headless runs advance simulation time in fixed ticks completely decoupled
from the wall clock; every component is driven synchronously from the loop
in a fixed order, so a (config, duration) pair maps to exactly one log byte
stream. Live runs execute the same tick function on a wall-clock schedule
with the TCP broker and WebSocket console bridge attached.

Tick order: sim/tick -> scripted ui events -> decoders (ssvep, emg, gaze)
-> swarm controller (publishes cmd_vel) -> robot step (publishes state) ->
tracker (if due) -> safety checks.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Optional

from . import messages
from .agents import (
    EmgAgent,
    GazeAgent,
    SafetyMonitor,
    SimEngine,
    SsvepAgent,
    SwarmController,
    TouchRouter,
    TrackerAgent,
)
from .broker import Broker, Envelope
from .logio import LogRecord, log_hash, replay as replay_records, write_log
from .scenario import ScenarioConfig, ScenarioValidationError, validate
from .world import WorldSnapshot, world_to_body


@dataclass
class RunResult:
    records: list[LogRecord]
    report: dict

    def hash(self) -> str:
        return log_hash(self.records)


class _SimClock:
    def __init__(self) -> None:
        self.t_us = 0

    def __call__(self) -> int:
        return self.t_us


class Simulation:
    """All components of one run wired onto one broker."""

    def __init__(self, hub: Broker, config: ScenarioConfig, clock: _SimClock):
        self.hub = hub
        self.config = config
        self.clock = clock
        # the log collector attaches first so it can never miss a message
        self.log: list[LogRecord] = []
        self._log_client = hub.client("log")
        self._log_client.on_message = self._append_log
        self._log_client.subscribe("#")

        self.touch = TouchRouter(hub)
        self.ssvep = SsvepAgent(hub, config)
        self.emg = EmgAgent(hub, config)
        self.gaze = GazeAgent(hub, config)
        self.controller = SwarmController(hub, config)
        self.sim = SimEngine(hub, config)
        self.tracker = TrackerAgent(hub, config)
        self.safety = SafetyMonitor(config.field)
        self._ticker = hub.client("gateway")
        self._script = list(config.script)
        self._script_pos = 0
        self.tick_index = 0

    def _append_log(self, env: Envelope) -> None:
        self.log.append(LogRecord(env.timestamp_us, env.topic, env.payload))

    def tick(self) -> None:
        cfg = self.config
        dt = 1.0 / cfg.tick_rate
        t_us = int(self.tick_index * 1_000_000 / cfg.tick_rate)
        self.clock.t_us = t_us
        t = t_us / 1e6

        self._ticker.publish("sim/tick", messages.dumps({"t": t, "tick": self.tick_index}))

        while self._script_pos < len(self._script) and self._script[self._script_pos].t <= t:
            event = self._script[self._script_pos]
            self._script_pos += 1
            self._ticker.publish(event.topic, messages.dumps(event.payload))

        self.touch.process()
        self.ssvep.process(t)
        self.emg.process(t_us)
        self.gaze.process(t)

        states = self.sim.ordered_states()
        twists = self.controller.tick(states, dt)
        for state in states:
            cmd = world_to_body(twists[state.id], state.pose.theta)
            self.controller.client.publish(
                f"robot/{state.id}/cmd_vel", messages.robot_cmd(cmd.vx, cmd.vy, cmd.omega)
            )

        self.sim.step(dt, t)

        stepped = self.sim.ordered_states()
        if self.tracker.due(t_us):
            snapshot = WorldSnapshot.of(t, stepped, cfg.obstacles, self.touch.touches())
            self.tracker.observe(t_us, snapshot)
        self.safety.check(stepped)
        self.tick_index += 1

    def report(self) -> dict:
        return {
            "ticks": self.tick_index,
            "messages_logged": len(self.log),
            "safety": self.safety.report(),
            "final_mode": self.controller.mode,
            "robots": {
                str(s.id): {"x": s.pose.x, "y": s.pose.y, "theta": s.pose.theta}
                for s in self.sim.ordered_states()
            },
        }


def run_scenario(
    config: ScenarioConfig,
    duration: Optional[float] = None,
    log_path=None,
) -> RunResult:
    """Headless deterministic run; returns the full log and the exit report."""
    errors = validate(config)
    if errors:
        raise ScenarioValidationError(errors)
    duration = config.duration if duration is None else duration
    clock = _SimClock()
    hub = Broker(clock_us=clock)
    sim = Simulation(hub, config, clock)
    n_ticks = int(round(duration * config.tick_rate))
    for _ in range(n_ticks):
        sim.tick()
    result = RunResult(records=sim.log, report=sim.report())
    if log_path is not None:
        write_log(result.records, log_path)
    return result


def replay_into_broker(
    records,
    hub: Broker,
    speed: float = 1.0,
    client_name: str = "replay",
) -> int:
    """Republish a recorded run onto a broker, preserving timestamps."""
    client = hub.client(client_name)
    try:
        return replay_records(
            records, lambda topic, payload, t: client.publish(topic, payload, t), speed
        )
    finally:
        client.close()


class LiveRunner:
    """Wall-clock loop executing the same tick function as headless runs."""

    def __init__(self, hub: Broker, config: ScenarioConfig):
        self.clock = _SimClock()
        self.hub = hub
        hub.set_clock(self.clock)  # sim time, not wall time, stamps envelopes
        self.sim = Simulation(hub, config, self.clock)
        self.config = config
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    def start(self) -> None:
        self._thread = threading.Thread(target=self._loop, name="sim-loop", daemon=True)
        self._thread.start()

    def _loop(self) -> None:
        period = 1.0 / self.config.tick_rate
        next_tick = time.monotonic()
        while not self._stop.is_set():
            self.sim.tick()
            next_tick += period
            delay = next_tick - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                next_tick = time.monotonic()  # fell behind; don't burst

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
