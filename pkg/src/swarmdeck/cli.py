"""Command-line entry points.

    swarmdeck run       headless or live scenario execution
    swarmdeck replay    republish a recorded log (TCP or fresh live stack)
    swarmdeck serve     broker + console bridge + live simulation
    swarmdeck validate  check a scenario file, list every violation
    swarmdeck train-emg train and save the gesture classifier
    swarmdeck bench     broker throughput measurement
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from .bridge import DEFAULT_WS_PORT, serve_console
from .broker import Broker
from .emg import MlpGestureClassifier, make_dataset
from .gateway import LiveRunner, replay_into_broker, run_scenario
from .logio import read_log, write_log
from .scenario import (
    PRESETS,
    ScenarioValidationError,
    apply_env_seed,
    load_config,
    validate,
)
from .seeds import derive_rng
from .tcp import DEFAULT_PORT, BrokerClient, BrokerServer


def _load_scenario(args):
    if args.config:
        config = load_config(args.config)
    elif args.preset:
        config = apply_env_seed(PRESETS[args.preset]())
    else:
        raise SystemExit("either --config or --preset is required")
    if args.seed is not None:
        from dataclasses import replace

        config = replace(config, seed=args.seed)
    return config


def cmd_run(args) -> int:
    config = _load_scenario(args)
    if args.live:
        return _run_live(config, args)
    try:
        result = run_scenario(config, duration=args.duration, log_path=args.log)
    except ScenarioValidationError as exc:
        for problem in exc.errors:
            print(f"invalid: {problem}", file=sys.stderr)
        return 2
    print(json.dumps(result.report, indent=2, sort_keys=True))
    print(f"log hash: {result.hash()}")
    if args.log:
        print(f"log written: {args.log} ({len(result.records)} records)")
    return 0 if result.report["safety"]["ok"] else 1


def _run_live(config, args) -> int:
    from dataclasses import replace

    config = replace(config, mode="live")
    problems = validate(config)
    if problems:
        for problem in problems:
            print(f"invalid: {problem}", file=sys.stderr)
        return 2
    hub = Broker()
    server = BrokerServer(hub, port=args.port)
    server.start()
    runner = LiveRunner(hub, config)
    bridge = serve_console(hub, port=args.ws_port)
    runner.start()
    print(f"broker: tcp://127.0.0.1:{server.port}")
    print(f"console bridge: ws://127.0.0.1:{bridge.port}")
    print("running; Ctrl-C to stop")
    try:
        if args.duration:
            time.sleep(args.duration)
        else:
            while True:
                time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        runner.stop()
        bridge.stop()
        server.stop()
        if args.log:
            write_log(runner.sim.log, args.log)
            print(f"log written: {args.log} ({len(runner.sim.log)} records)")
    print(json.dumps(runner.sim.report(), indent=2, sort_keys=True))
    return 0


def cmd_replay(args) -> int:
    records = list(read_log(args.log))
    if args.connect:
        host, _, port = args.connect.partition(":")
        client = BrokerClient(host or "127.0.0.1", int(port or DEFAULT_PORT), name="replay")
        try:
            for record in _paced(records, args.speed):
                client.publish(record.topic, record.payload, record.t_us)
        finally:
            client.close()
        print(f"replayed {len(records)} records to {args.connect}")
        return 0
    # fresh stack: local broker + console bridge, so a console can watch
    hub = Broker()
    bridge = serve_console(hub, port=args.ws_port)
    print(f"console bridge: ws://127.0.0.1:{bridge.port}")
    try:
        count = replay_into_broker(records, hub, speed=args.speed)
    finally:
        bridge.stop()
    print(f"replayed {count} records")
    return 0


def _paced(records, speed):
    prev = None
    for record in records:
        if speed > 0 and prev is not None and record.t_us > prev:
            time.sleep((record.t_us - prev) / 1e6 / speed)
        prev = record.t_us
        yield record


def cmd_serve(args) -> int:
    args.live = True
    return _run_live(_load_scenario(args), args)


def cmd_validate(args) -> int:
    try:
        config = load_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"cannot load config: {exc}", file=sys.stderr)
        return 2
    problems = validate(config)
    if problems:
        for problem in problems:
            print(problem)
        return 1
    print("scenario is valid")
    return 0


def cmd_train_emg(args) -> int:
    rng = derive_rng(args.seed, "emg/train")
    X, y = make_dataset(args.per_class, rng)
    model = MlpGestureClassifier(epochs=args.epochs, learning_rate=args.lr, seed=args.seed)
    model.fit(X, y)
    X_test, y_test = make_dataset(50, derive_rng(args.seed, "emg/heldout"))
    acc = float((model.predict(X_test) == y_test).mean())
    model.save(args.out)
    print(f"trained on {len(y)} windows; held-out accuracy {acc:.3f}")
    print(f"model written: {args.out}")
    return 0 if acc >= 0.9 else 1


def cmd_bench(args) -> int:
    hub = Broker(clock_us=lambda: int(time.monotonic() * 1e6))
    server = BrokerServer(hub, port=0)
    server.start()
    subs = []
    for i in range(args.subscribers):
        sub = BrokerClient(port=server.port, name=f"bench-sub-{i}")
        sub.subscribe("bench/#")
        sub.ping()
        subs.append(sub)
    pub = BrokerClient(port=server.port, name="bench-pub")
    payload = b"x" * args.size
    start = time.perf_counter()
    pub.publish_many(("bench/data", payload, i) for i in range(args.messages))
    received = 0
    deadline = time.time() + 30
    for sub in subs:
        got = 0
        while got < args.messages and time.time() < deadline:
            if sub.get(timeout=1.0) is not None:
                got += 1
        received += got
    elapsed = time.perf_counter() - start
    for sub in subs:
        sub.close()
    pub.close()
    server.stop()
    expected = args.messages * args.subscribers
    rate = args.messages / elapsed
    print(
        f"{args.messages} msgs to {args.subscribers} subscribers in {elapsed:.2f}s "
        f"= {rate:.0f} msg/s in, {received}/{expected} delivered"
    )
    return 0 if received == expected and rate >= 1000 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swarmdeck", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario")
    run.add_argument("--config", help="scenario JSON file")
    run.add_argument("--preset", choices=sorted(PRESETS), help="bundled scenario")
    run.add_argument("--duration", type=float, help="override duration (seconds)")
    run.add_argument("--seed", type=int, help="override the root seed")
    run.add_argument("--log", help="write the run log here (ndjson)")
    run.add_argument("--live", action="store_true", help="wall-clock mode with TCP + WS")
    run.add_argument("--port", type=int, default=DEFAULT_PORT, help="broker TCP port")
    run.add_argument("--ws-port", type=int, default=DEFAULT_WS_PORT, help="console WS port")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("replay", help="republish a recorded log")
    rep.add_argument("--log", required=True)
    rep.add_argument("--speed", type=float, default=1.0, help="0 = as fast as possible")
    rep.add_argument("--connect", help="host:port of a running broker")
    rep.add_argument("--ws-port", type=int, default=DEFAULT_WS_PORT)
    rep.set_defaults(func=cmd_replay)

    srv = sub.add_parser("serve", help="live broker + console bridge + simulation")
    srv.add_argument("--config", help="scenario JSON file")
    srv.add_argument("--preset", choices=sorted(PRESETS), default="emg-ten")
    srv.add_argument("--duration", type=float, help="stop after this many seconds")
    srv.add_argument("--seed", type=int)
    srv.add_argument("--log", help="write the run log on shutdown")
    srv.add_argument("--port", type=int, default=DEFAULT_PORT)
    srv.add_argument("--ws-port", type=int, default=DEFAULT_WS_PORT)
    srv.set_defaults(func=cmd_serve)

    val = sub.add_parser("validate", help="check a scenario file")
    val.add_argument("--config", required=True)
    val.set_defaults(func=cmd_validate)

    tr = sub.add_parser("train-emg", help="train and save the gesture classifier")
    tr.add_argument("--out", required=True, help="model output path (json)")
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--per-class", type=int, default=60)
    tr.add_argument("--epochs", type=int, default=300)
    tr.add_argument("--lr", type=float, default=0.1)
    tr.set_defaults(func=cmd_train_emg)

    be = sub.add_parser("bench", help="broker throughput benchmark")
    be.add_argument("--messages", type=int, default=2000)
    be.add_argument("--subscribers", type=int, default=10)
    be.add_argument("--size", type=int, default=128)
    be.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
