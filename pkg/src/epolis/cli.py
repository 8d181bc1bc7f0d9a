"""Operator command line: serve, validate, simulate, export, analyze, replay.

Exit codes: 0 success, 2 usage or content validation failure, 3 runtime
failure (including a replay that does not match the stored projection).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import analytics, exporter
from .dilemmas import load_pack
from .errors import EpolisError, ParseError, ValidationError
from .server import create_app
from .service import (
    GameService,
    compare_projections,
    init_data_dir,
    load_data_dir,
    replay_log,
)
from .simbot import BotPolicy, InProcessClient, run_population
from .store import EventStore, LOG_FILENAME, PROJECTION_FILENAME
from .world import CityMap, load_map


@click.group()
def main():
    """Survey-gamification game server and its operator tools.

    The content and server flags also read from the environment:
    EPOLIS_MAP, EPOLIS_PACK, EPOLIS_DATA, EPOLIS_LISTEN.
    """


def _fail(messages, code=2):
    for m in messages:
        click.echo(m, err=True)
    sys.exit(code)


def _content_errors(prefix: str, exc: Exception) -> list[str]:
    if isinstance(exc, ValidationError):
        return [f"{prefix}: {d}" for d in exc.diagnostics]
    return [f"{prefix}: {exc}"]


def _load_content(map_path: Path, pack_path: Path):
    problems: list[str] = []
    cmap = None
    map_text = map_path.read_text(encoding="utf-8")
    pack_text = pack_path.read_text(encoding="utf-8")
    try:
        cmap = load_map(map_text)
    except (ParseError, ValidationError) as exc:
        problems.extend(_content_errors("map", exc))
    pack = None
    try:
        # validate the pack even when the map is broken, against a permissive
        # stand-in, so one run reports both files' problems
        basis = cmap if cmap is not None else _permissive_map()
        pack = load_pack(pack_text, basis)
    except (ParseError, ValidationError) as exc:
        problems.extend(_content_errors("pack", exc))
    return cmap, pack, map_text, pack_text, problems


def _permissive_map() -> CityMap:
    rows = ["S" + "." * 1023] + ["." * 1024] * 1022 + ["B" + "." * 1023]
    return CityMap(name="_fallback", cell_size=1.0, rows=tuple(rows))


_map_opt = click.option("--map", "map_path", required=True, envvar="EPOLIS_MAP",
                        type=click.Path(exists=True, dir_okay=False, path_type=Path))
_pack_opt = click.option("--pack", "pack_path", required=True, envvar="EPOLIS_PACK",
                         type=click.Path(exists=True, dir_okay=False, path_type=Path))
_data_opt = click.option("--data", "data_dir", required=True, envvar="EPOLIS_DATA",
                         type=click.Path(file_okay=False, path_type=Path))


@main.command()
@_map_opt
@_pack_opt
def validate(map_path: Path, pack_path: Path):
    """Check a map and a pack; print every violated invariant."""
    _, _, _, _, problems = _load_content(map_path, pack_path)
    if problems:
        _fail(problems)
    click.echo("OK")


@main.command()
@_map_opt
@_pack_opt
@_data_opt
@click.option("--listen", default="127.0.0.1:8080", show_default=True, envvar="EPOLIS_LISTEN",
              help="host:port to bind")
@click.option("--client-dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="static web client bundle to serve at /")
def serve(map_path, pack_path, data_dir, listen, client_dir):
    """Run the game server until interrupted."""
    import uvicorn

    cmap, pack, map_text, pack_text, problems = _load_content(map_path, pack_path)
    if problems:
        _fail(problems)
    try:
        init_data_dir(data_dir, map_text, pack_text)
    except ValueError as exc:
        _fail([str(exc)])
    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise click.UsageError(f"--listen must be host:port, got {listen!r}")
    store = EventStore(data_dir)
    for warning in store.warnings:
        click.echo(f"WARN: {warning}", err=True)
    service = GameService(cmap, pack, store)
    app = create_app(service, client_dir=client_dir)
    click.echo(f"listening on {listen}", err=True)
    try:
        uvicorn.run(app, host=host, port=int(port), log_level="warning")
    finally:
        store.close()


@main.command()
@click.option("--players", required=True, type=click.IntRange(min=1))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--policy", default="shortest-path", show_default=True,
              type=click.Choice(["shortest-path", "random-walk"]))
@click.option("--answers", default="uniform", show_default=True,
              help='"uniform" or a comma-separated scripted key list such as A,B,C,D')
@_map_opt
@_pack_opt
@_data_opt
def simulate(players, seed, policy, answers, map_path, pack_path, data_dir):
    """Run seeded bots in-process on a virtual clock; fully reproducible."""
    cmap, pack, map_text, pack_text, problems = _load_content(map_path, pack_path)
    if problems:
        _fail(problems)
    if (Path(data_dir) / LOG_FILENAME).exists():
        _fail([f"{data_dir} already contains an event log; simulate needs a fresh directory"])
    try:
        init_data_dir(data_dir, map_text, pack_text)
    except ValueError as exc:
        _fail([str(exc)])
    bot_policy = BotPolicy(
        movement=policy.replace("-", "_"),
        answers="uniform" if answers == "uniform" else tuple(answers.split(",")),
    )
    store = EventStore(data_dir)
    try:
        service = GameService(cmap, pack, store, clock=None)
        report, _ = run_population(players, seed, bot_policy, cmap, pack, InProcessClient(service))
    except EpolisError as exc:
        click.echo(f"simulation failed: {exc}", err=True)
        sys.exit(3)
    finally:
        store.close()
    click.echo(json.dumps({
        "sessions": report.sessions,
        "completed": report.completed,
        "total_actions": report.total_actions,
        "total_movements": report.total_movements,
        "wall_time_s": round(report.wall_time_s, 3),
    }))


def _open_data(data_dir: Path):
    """Content plus a queryable store; rebuilds a missing projection from the log."""
    try:
        cmap, pack = load_data_dir(data_dir)
    except (FileNotFoundError, ParseError, ValidationError) as exc:
        _fail([str(exc)])
    if not (Path(data_dir) / PROJECTION_FILENAME).exists():
        result = replay_log(Path(data_dir) / LOG_FILENAME, cmap, pack,
                            store=EventStore(data_dir, read_only=True))
        for warning in result.warnings:
            click.echo(f"WARN: {warning}", err=True)
        return cmap, pack, result.service.store
    return cmap, pack, EventStore(data_dir, read_only=True)


@main.command()
@click.option("--kind", required=True, type=click.Choice(["actions", "movements"]))
@click.option("--format", "format_name", required=True)
@click.option("--mode", default="paper", show_default=True)
@_data_opt
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False, path_type=Path))
def export(kind, format_name, mode, data_dir, output):
    """Write stored rows to a CSV/JSON/XML/YAML file."""
    try:
        fmt = exporter.parse_format(format_name)
        export_mode = exporter.parse_mode(mode)
    except EpolisError as exc:
        raise click.UsageError(str(exc)) from None
    _, _, store = _open_data(data_dir)
    if kind == "actions":
        payload = exporter.export_actions(store.query_actions(), fmt, export_mode)
    else:
        payload = exporter.export_movements(store.query_movements(), fmt, export_mode)
    store.close()
    output.write_bytes(payload)
    click.echo(f"wrote {output}")


@main.command()
@click.option("--report", required=True, type=click.Choice(["tta", "hotspots", "distribution"]))
@click.option("--cell-size", default=2.0, show_default=True, type=float)
@click.option("--top", default=5, show_default=True, type=click.IntRange(min=1))
@click.option("--json", "as_json", is_flag=True, help="machine-readable output")
@_data_opt
def analyze(report, cell_size, top, as_json, data_dir):
    """Print an analytics report over the stored telemetry."""
    _, pack, store = _open_data(data_dir)
    actions = store.query_actions()
    movements = store.query_movements()
    store.close()
    if report == "tta":
        rows = analytics.tta_report(analytics.question_stats(actions, movements, pack))
    elif report == "hotspots":
        rows = analytics.hotspot_report(analytics.dwell_map(movements, cell_size), top)
    else:
        dist = analytics.answer_distribution(actions)
        rows = [{"question_number": q, "choice": c, "count": n}
                for q, counts in dist.items() for c, n in counts.items()]
    if as_json:
        click.echo(json.dumps({"report": report, "rows": rows}))
        return
    if not rows:
        click.echo("(no data)")
        return
    headers = list(rows[0].keys())
    widths = [max(len(h), *(len(_fmt_cell(r[h])) for r in rows)) for h in headers]
    click.echo("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    for r in rows:
        click.echo("  ".join(_fmt_cell(r[h]).ljust(w) for h, w in zip(headers, widths)))


def _fmt_cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


@main.command()
@_data_opt
def replay(data_dir: Path):
    """Rebuild the projection from the log and check it against the stored one."""
    try:
        cmap, pack = load_data_dir(data_dir)
    except (FileNotFoundError, ParseError, ValidationError) as exc:
        _fail([str(exc)])
    log_path = Path(data_dir) / LOG_FILENAME
    projection_path = Path(data_dir) / PROJECTION_FILENAME
    try:
        if not projection_path.exists():
            result = replay_log(log_path, cmap, pack, store=EventStore(data_dir, read_only=True))
            diffs = []
        else:
            result = replay_log(log_path, cmap, pack)
            existing = EventStore(data_dir, read_only=True)
            diffs = compare_projections(existing, result.service.store)
            existing.close()
    except EpolisError as exc:
        click.echo(f"replay failed: {exc}", err=True)
        sys.exit(3)
    for warning in result.warnings:
        click.echo(f"WARN: {warning}", err=True)
    _, actions, movements = result.service.store.counts()
    result.service.store.close()
    if diffs:
        _fail([f"projection mismatch: {d}" for d in diffs], code=3)
    click.echo(f"OK rows={actions + movements}")


if __name__ == "__main__":
    main()
