"""Command-line entry points.

Cluster-style commands (submit/status/fetch/list) talk to a running
`serve` instance over the newline-delimited JSON service protocol;
everything else runs locally in-process.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import controllers, dataset, evaluation, harness, wire
from .episode import build_backend
from .recorder import read_log_file, write_log_file
from .scheduler import BuiltIn, External, JobSpec, Scheduler
from .service import SchedulerService, ServiceClient

DEFAULT_ADDR = "127.0.0.1:7180"


def _addr(args):
    host, _, port = (args.addr or os.environ.get("ROBOBENCH_ADDR", DEFAULT_ADDR)).partition(":")
    return host, int(port)


def _controller_arg(value):
    if value in controllers.REGISTRY:
        return BuiltIn(value)
    return External(value)


def cmd_submit(args):
    spec = JobSpec(
        user=args.user,
        phase=args.phase,
        level=args.level,
        controller=_controller_arg(args.controller),
        seed=args.seed,
    )
    client = ServiceClient(*_addr(args))
    try:
        print(client.submit(spec))
    finally:
        client.close()
    return 0


def cmd_status(args):
    client = ServiceClient(*_addr(args))
    try:
        job = client.status(args.job)
    finally:
        client.close()
    print(json.dumps(job, indent=2, sort_keys=True))
    return 0


def cmd_fetch(args):
    client = ServiceClient(*_addr(args))
    try:
        data = client.fetch(args.job)
    finally:
        client.close()
    with open(args.output, "wb") as f:
        f.write(data)
    print(f"wrote {len(data)} bytes to {args.output}")
    return 0


def cmd_list(args):
    client = ServiceClient(*_addr(args))
    try:
        jobs = client.list()
    finally:
        client.close()
    for job in jobs:
        print(f"{job['job_id']}  {job['state']:<9} {job['spec']['user']}")
    return 0


def cmd_serve(args):
    scheduler = Scheduler(args.data, n_robots=args.robots, seed=args.seed)
    scheduler.start()
    host, port = _addr(args)
    service = SchedulerService(scheduler, (host, port))
    print(f"serving on {service.server_address[0]}:{service.port}", flush=True)
    try:
        service.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        service.shutdown()
        scheduler.stop()
    return 0


def cmd_demo(args):
    """Run every built-in controller on every level, phase 1, and print metrics."""
    scheduler = Scheduler(args.data, n_robots=args.robots, seed=args.seed)
    jobs = []
    for name in sorted(controllers.REGISTRY):
        for level in (1, 2, 3, 4):
            spec = JobSpec(user=name, phase=1, level=level, controller=BuiltIn(name), seed=args.seed)
            jobs.append((name, level, scheduler.submit_job(spec)))
    scheduler.run_pending()
    for name, level, job_id in jobs:
        record = scheduler.job_status(job_id)
        if record.state == "Finished":
            metrics = dataset.compute_metrics(read_log_file(record.result_ref))
            print(
                f"{name:<14} L{level}  reward {metrics.cumulative_reward:10.1f}"
                f"  baseline {metrics.baseline_reward:10.1f}"
                f"  closest {metrics.closest_dist_to_goal:.3f} m"
            )
        else:
            print(f"{name:<14} L{level}  {record.state}: {record.failure_reason}")
    return 0


def cmd_evaluate(args):
    with open(args.teams) as f:
        entries = json.load(f)
    teams = [(e["user"], _controller_arg(e["controller"])) for e in entries]
    breakdowns = harness.run_evaluation(
        teams, goals_per_level=args.goals_per_level, seed=args.seed, phase=args.phase,
        data_dir=args.data,
    )
    rendered = evaluation.leaderboard_to_json(breakdowns)
    if args.out:
        with open(args.out, "w") as f:
            f.write(rendered + "\n")
    print(evaluation.render_leaderboard(breakdowns))
    return 0


def cmd_metrics(args):
    log = read_log_file(args.file)
    metrics = dataset.compute_metrics(log)
    print(json.dumps({name: getattr(metrics, name) for name in metrics.__dataclass_fields__},
                     indent=2, sort_keys=True))
    return 0


def cmd_index(args):
    count, skipped = dataset.build_index(args.dir, args.output)
    print(f"indexed {count} episodes into {args.output}")
    for name, reason in skipped:
        print(f"skipped {name}: {reason}", file=sys.stderr)
    return 0


def cmd_filter(args):
    for episode_id in dataset.filter_episodes(args.index, args.expression):
        print(episode_id)
    return 0


def cmd_export(args):
    log_dir = args.logs or os.path.dirname(os.path.abspath(args.index))
    selected = dataset.export_selection(args.index, args.expression, log_dir, args.output)
    print(f"exported {len(selected)} episodes to {args.output}")
    return 0


def cmd_serve_robot(args):
    """Serve a single episode backend on TCP for an external client.

    Prints "port NNNN" once listening; writes the finalized log when the
    episode ends.
    """
    backend = build_backend(phase=args.phase, level=args.level, seed=args.seed)
    log = wire.serve_backend_tcp(backend, host="127.0.0.1", port=args.port,
                                 announce=lambda port: print(f"port {port}", flush=True),
                                 connect_timeout=args.connect_timeout)
    if args.out:
        write_log_file(log, args.out)
        print(f"wrote {args.out}", flush=True)
    return 0


def cmd_dump(args):
    """Dump a .tfel log as JSON (for cross-language tests and inspection)."""
    log = read_log_file(args.file)
    steps = slice(0, args.limit if args.limit else log.n_steps)
    data = {
        "header": log.header_dict(),
        "steps": [
            {
                "t": int(rec["t"]),
                "desired_kind": int(rec["desired_kind"]),
                "desired": rec["desired"].tolist(),
                "applied": rec["applied"].tolist(),
                "position": rec["position"].tolist(),
                "velocity": rec["velocity"].tolist(),
                "torque": rec["torque"].tolist(),
                "tip_force": rec["tip_force"].tolist(),
            }
            for rec in log.steps[steps]
        ],
        "camera_records": [
            {
                "t": int(rec.timestep),
                "position": np.asarray(rec.position).tolist(),
                "orientation": np.asarray(rec.orientation).tolist(),
                "confidence": float(rec.confidence),
            }
            for rec in log.camera_records
            if args.limit == 0 or rec.timestep < args.limit
        ],
    }
    json.dump(data, sys.stdout)
    print()
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="robobench")
    parser.add_argument("--addr", help="service address host:port "
                        f"(default $ROBOBENCH_ADDR or {DEFAULT_ADDR})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("submit", help="submit a job to a running service")
    p.add_argument("--phase", type=int, required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--controller", required=True,
                   help="built-in name or external command line")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--user", default=os.environ.get("USER", "anonymous"))
    p.set_defaults(func=cmd_submit)

    p = sub.add_parser("status", help="query one job")
    p.add_argument("job")
    p.set_defaults(func=cmd_status)

    p = sub.add_parser("fetch", help="download a finished job's log")
    p.add_argument("job")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("list", help="list all jobs")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("serve", help="run the scheduler service")
    p.add_argument("--robots", type=int, default=8)
    p.add_argument("--data", default=os.environ.get("ROBOBENCH_DATA", "robobench-data"))
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("demo", help="run built-in controllers across all levels")
    p.add_argument("--data", default=os.environ.get("ROBOBENCH_DATA", "robobench-data"))
    p.add_argument("--robots", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("evaluate", help="competition-style evaluation")
    p.add_argument("--teams", required=True, help="JSON file: [{user, controller}, ...]")
    p.add_argument("--goals-per-level", type=int, default=3)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--phase", type=int, default=2)
    p.add_argument("--out", help="leaderboard JSON output path")
    p.add_argument("--data", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("metrics", help="print metrics of one log")
    p.add_argument("file")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("index", help="build a metadata index over a log directory")
    p.add_argument("dir")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("filter", help="list episode ids matching a predicate")
    p.add_argument("index")
    p.add_argument("expression")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("export", help="copy matching logs plus chunked exports")
    p.add_argument("index")
    p.add_argument("expression")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--logs", help="log directory (default: index directory)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve-robot", help="serve one episode backend on TCP")
    p.add_argument("--phase", type=int, default=1)
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--port", type=int, default=0)
    p.add_argument("--connect-timeout", type=float, default=60.0)
    p.add_argument("--out", help="write the finalized log here")
    p.set_defaults(func=cmd_serve_robot)

    p = sub.add_parser("dump", help="dump a log as JSON")
    p.add_argument("file")
    p.add_argument("--limit", type=int, default=0, help="only the first N steps")
    p.set_defaults(func=cmd_dump)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
