"""Operator entry points: serve the services, import seed files, train and
package networks, and run/verify simulator scenarios.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import ann
from .errors import HivemindError
from .seedio import import_direct, import_via_client, parse_seed_text
from .simulator import render_log, run_scenario
from .store import Store
from .training import TrainConfig, train


def _in_process_client(store: Store):
    from fastapi.testclient import TestClient
    from .services import create_app
    return TestClient(create_app(store, ui_dir=_default_ui_dir()))


def _default_ui_dir() -> str | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return str(candidate) if candidate.is_dir() else None


@click.group()
@click.option("--log-level", default="info", envvar="HIVEMIND_LOG_LEVEL",
              type=click.Choice(["debug", "info", "warning", "error"]))
def main(log_level):
    logging.basicConfig(level=log_level.upper())


@main.command()
@click.option("--store", "store_path", envvar="HIVEMIND_STORE", required=True)
@click.option("--listen", default="127.0.0.1:8080", envvar="HIVEMIND_LISTEN")
def serve(store_path, listen):
    """Run the Concept, Machine, and Interop services."""
    import uvicorn
    from .services import create_app

    parent = Path(store_path).parent
    if not parent.exists():
        click.echo(f"store parent directory does not exist: {parent}", err=True)
        sys.exit(1)
    host, _, port = listen.partition(":")
    app = create_app(Store(store_path), ui_dir=_default_ui_dir())
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080))


@main.command("import")
@click.option("--seed-file", required=True, type=click.Path(exists=True))
@click.option("--store", "store_path", envvar="HIVEMIND_STORE", default=None)
@click.option("--listen", envvar="HIVEMIND_LISTEN", default=None,
              help="Base URL of a running server; default is an in-process service stack.")
@click.option("--direct", is_flag=True, help="Write straight to the store, bypassing services.")
def import_cmd(seed_file, store_path, listen, direct):
    """Load a seed file through the service methods."""
    try:
        ops = parse_seed_text(Path(seed_file).read_text())
        if direct:
            report = import_direct(Store(store_path), ops)
        elif listen:
            import httpx
            base = listen if listen.startswith("http") else f"http://{listen}"
            with httpx.Client(base_url=base) as client:
                report = import_via_client(client, ops)
        else:
            report = import_via_client(_in_process_client(Store(store_path)), ops)
    except HivemindError as exc:
        click.echo(f"error [{exc.code}]: {exc.message}", err=True)
        sys.exit(1)
    click.echo(json.dumps({"created": report.created, "skipped": report.skipped,
                           "errors": report.errors}))
    if report.errors:
        sys.exit(1)


@main.command("train")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True),
              help="JSON file: {topology, learning_rate, max_epochs, target_error, seed, data}")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Write the packed network here (default: stdout).")
def train_cmd(dataset_path, out_path):
    """Train a network and package it into the ASCII notation."""
    spec = json.loads(Path(dataset_path).read_text())
    config = TrainConfig(
        topology=tuple(spec["topology"]),
        learning_rate=spec.get("learning_rate", 0.5),
        max_epochs=spec.get("max_epochs", 20000),
        target_error=spec.get("target_error", 0.01),
        seed=spec.get("seed", 1))
    dataset = [(pair[0], pair[1]) for pair in spec["data"]]
    result = train(config, dataset)
    payload = ann.encode_network(result.network)
    if out_path:
        Path(out_path).write_bytes(payload)
    else:
        click.echo(payload.decode("ascii"))
    click.echo(json.dumps({"epochs": result.epochs, "final_error": result.final_error,
                           "converged": result.converged}), err=True)


@main.group()
def sim():
    """Simulator scenario runner."""


def _load_scenario(path: str) -> tuple[dict, Path]:
    p = Path(path)
    if not p.exists():
        builtin = Path(__file__).resolve().parents[2] / "scenarios" / f"{path}.json"
        if builtin.exists():
            p = builtin
        else:
            click.echo(f"scenario not found: {path}", err=True)
            sys.exit(1)
    return json.loads(p.read_text()), p


def _run(scenario_path: str, seed: int) -> tuple[dict, Path]:
    scenario, p = _load_scenario(scenario_path)
    store = Store(None)
    client = _in_process_client(store)
    result = run_scenario(client, scenario, base_dir=p.parent.parent
                          if p.parent.name == "scenarios" else p.parent, seed=seed)
    return result, p


@sim.command("run")
@click.option("--scenario", required=True)
@click.option("--seed", default=0, type=int)
def sim_run(scenario, seed):
    """Execute a scenario against a fresh in-process service stack."""
    try:
        result, _ = _run(scenario, seed)
    except HivemindError as exc:
        click.echo(f"error [{exc.code}]: {exc.message}", err=True)
        sys.exit(1)
    click.echo(render_log(result["log"]), nl=False)
    sys.exit(0 if result["status"] == "done" else 1)


@sim.command("verify")
@click.option("--scenario", required=True)
@click.option("--seed", default=0, type=int)
@click.option("--log", "log_path", default=None, type=click.Path(),
              help="Recorded run log (default: <scenario>.runlog).")
def sim_verify(scenario, seed, log_path):
    """Re-run a scenario and diff the log against a recorded run."""
    try:
        result, p = _run(scenario, seed)
    except HivemindError as exc:
        click.echo(f"error [{exc.code}]: {exc.message}", err=True)
        sys.exit(1)
    recorded = Path(log_path) if log_path else p.with_suffix(".runlog")
    if not recorded.exists():
        click.echo(f"recorded log not found: {recorded}", err=True)
        sys.exit(1)
    fresh = render_log(result["log"])
    if fresh.encode() == recorded.read_bytes():
        click.echo("verify: OK")
        sys.exit(0)
    click.echo("verify: MISMATCH", err=True)
    sys.exit(1)


if __name__ == "__main__":
    main()
