"""Command-line client for the ghzsim service.

Every subcommand builds a request, sends it through the HTTP layer, and
writes the response to disk. By default the app is served in-process (no
socket); pass ``--server URL`` to talk to a running instance instead.

Exit codes: 0 success, 1 usage or config error, 2 a requested violation
test failed its bound (with ``--require-violation``).
"""

from __future__ import annotations

import csv
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import click
import httpx
from pydantic import ValidationError

from .pipeline import report_json
from .schemas import ExperimentConfig, MERMIN_PHASE_DEFAULT


class _InProcessTransport(httpx.BaseTransport):
    """Synchronous transport that drives the ASGI app directly, no socket."""

    def __init__(self, app) -> None:
        self._asgi = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        import asyncio

        async def call() -> httpx.Response:
            response = await self._asgi.handle_async_request(request)
            await response.aread()
            await response.aclose()
            return response

        response = asyncio.run(call())
        return httpx.Response(
            status_code=response.status_code,
            headers=response.headers,
            content=response.content,
            request=request,
        )


def _make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    # In-process transport; the CLI stays a pure HTTP client either way.
    from .service import app

    return httpx.Client(transport=_InProcessTransport(app), base_url="http://ghzsim.local")


def _fail(message: str, code: int = 1) -> None:
    click.echo(message, err=True)
    sys.exit(code)


def _format_validation_errors(errors) -> str:
    lines = []
    for err in errors:
        loc = ".".join(str(part) for part in err.get("loc", ())) or "<root>"
        lines.append(f"  {loc}: {err.get('msg', 'invalid')}")
    return "\n".join(lines)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    try:
        response = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        _fail(f"service request failed: {exc}")
    if response.status_code == 422:
        detail = response.json().get("detail", [])
        _fail("invalid request:\n" + _format_validation_errors(detail))
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        _fail(f"error: {detail}")
    return response.json()


def _load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        _fail(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        _fail(f"config {path} is not valid JSON: {exc}")
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        _fail(f"invalid config {path}:\n" + _format_validation_errors(exc.errors()))


def _load_records_document(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        _fail(f"cannot read records {path}: {exc}")
    except json.JSONDecodeError as exc:
        _fail(f"records {path} are not valid JSON: {exc}")


def _write_json(path: Path, obj: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _write_csv(path: Path, header: list, rows: list) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _uv(block: dict) -> str:
    return f"{block['value']:.4f} +/- {block['sigma']:.4f}"


@click.group()
@click.option("--server", default=None, metavar="URL", help="Base URL of a running service; default runs in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Simulate and analyze multi-photon GHZ entanglement experiments."""
    ctx.obj = _make_client(server)


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None, help="Experiment config JSON.")
@click.option("--n", "n", type=click.Choice(["3", "4"]), default=None, help="Photon count override.")
@click.option("--out", type=click.Path(), default=".", help="Output directory.")
@click.pass_obj
def state(client: httpx.Client, config_path: str | None, n: str | None, out: str) -> None:
    """Write the noisy GHZ density matrix as JSON."""
    config = _load_config(config_path)
    payload = {"n": int(n) if n else config.n, "noise": config.noise.model_dump(mode="json")}
    body = _post(client, "/state", payload)
    target = Path(out) / "state.json"
    _write_json(target, body)
    click.echo(f"wrote {target}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None, help="Experiment config JSON.")
@click.option("--n", "n", type=click.Choice(["3", "4"]), default=None, help="Photon count override.")
@click.option("--settings", default="tomography", show_default=True,
              help="tomography | avn | mermin | witness | comma-separated list.")
@click.option("--shots", type=int, default=None, help="Shots per setting override.")
@click.option("--seed", type=int, default=None, help="RNG seed override (64-bit unsigned).")
@click.option("--accidental-fraction", type=float, default=None, help="Uniform background fraction.")
@click.option("--out", type=click.Path(), default=".", help="Output directory.")
@click.pass_obj
def sample(client, config_path, n, settings, shots, seed, accidental_fraction, out) -> None:
    """Sample count records for a group of measurement settings."""
    config = _load_config(config_path)
    sampler = config.sampler.model_dump(mode="json")
    if shots is not None:
        sampler["shots_per_setting"] = shots
    if seed is not None:
        sampler["seed"] = seed
    if accidental_fraction is not None:
        sampler["accidental_fraction"] = accidental_fraction
    choice = [s.strip() for s in settings.split(",")] if "," in settings else settings
    if isinstance(choice, str) and choice not in ("tomography", "avn", "mermin", "witness"):
        choice = [choice]
    payload = {
        "n": int(n) if n else config.n,
        "noise": config.noise.model_dump(mode="json"),
        "sampler": sampler,
        "settings": choice,
    }
    body = _post(client, "/sample", payload)
    target = Path(out) / "records.json"
    _write_json(target, body)
    click.echo(f"wrote {target} ({len(body['records'])} settings)")


@main.command()
@click.option("--records", "records_path", type=click.Path(), required=True, help="Records JSON file.")
@click.option("--target-phase", type=float, default=0.0, show_default=True, help="GHZ phase of the fidelity target.")
@click.option("--resamples", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=".", help="Output directory.")
@click.pass_obj
def tomo(client, records_path, target_phase, resamples, seed, out) -> None:
    """Reconstruct a density matrix from a complete tomography record set."""
    payload = {
        "records": _load_records_document(records_path),
        "target_phase": target_phase,
        "resamples": resamples,
        "seed": seed,
    }
    body = _post(client, "/analyze/tomography", payload)
    target = Path(out) / "tomography.json"
    _write_json(target, body)
    click.echo(f"fidelity = {_uv(body['fidelity'])}")
    click.echo(f"wrote {target}")


@main.command()
@click.option("--records", "records_path", type=click.Path(), required=True, help="Records JSON file.")
@click.option("--resamples", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--require-violation", is_flag=True, help="Exit 2 unless epsilon_max stays below 1/4.")
@click.option("--out", type=click.Path(), default=".", help="Output directory.")
@click.pass_obj
def avn(client, records_path, resamples, seed, require_violation, out) -> None:
    """All-versus-nothing error rates against the 1/4 bound."""
    payload = {"records": _load_records_document(records_path), "resamples": resamples, "seed": seed}
    body = _post(client, "/analyze/avn", payload)
    target = Path(out) / "avn.json"
    _write_json(target, body)
    for entry in body["per_setting"]:
        click.echo(f"  {entry['setting']}: epsilon = {_uv(entry['epsilon'])}")
    click.echo(f"epsilon_mean = {_uv(body['epsilon_mean'])}")
    click.echo(f"epsilon_max  = {_uv(body['epsilon_max'])} (bound {body['bound']})")
    click.echo(f"violates local realism: {body['violates_local_realism']}")
    click.echo(f"wrote {target}")
    if require_violation and not body["violates_local_realism"]:
        sys.exit(2)


@main.command()
@click.option("--records", "records_path", type=click.Path(), required=True, help="Records JSON file.")
@click.option("--resamples", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--target-phase", type=float, default=None, help="GHZ phase the records were prepared at.")
@click.option("--require-violation", is_flag=True, help="Exit 2 unless the classical bound is violated.")
@click.option("--out", type=click.Path(), default=".", help="Output directory.")
@click.pass_obj
def mermin(client, records_path, resamples, seed, target_phase, require_violation, out) -> None:
    """Mermin inequality value (M4 for 4 photons, M3 for 3)."""
    payload = {
        "records": _load_records_document(records_path),
        "resamples": resamples,
        "seed": seed,
        "target_phase": target_phase,
    }
    body = _post(client, "/analyze/mermin", payload)
    target = Path(out) / "mermin.json"
    _write_json(target, body)
    click.echo(f"Mermin value = {_uv(body['value'])}")
    click.echo(f"classical bound {body['classical_bound']}, quantum max {body['quantum_max']:.4f}")
    if body["standard_deviations_of_violation"] is not None:
        click.echo(f"violation: {body['standard_deviations_of_violation']:.1f} standard deviations")
    click.echo(f"wrote {target}")
    if require_violation and body["value"]["value"] <= body["classical_bound"]:
        sys.exit(2)


@main.command()
@click.option("--records", "records_path", type=click.Path(), required=True, help="Records JSON file.")
@click.option("--resamples", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=".", help="Output directory.")
@click.pass_obj
def witness(client, records_path, resamples, seed, out) -> None:
    """Two-setting entanglement witness from XXXX and ZZZZ records."""
    payload = {"records": _load_records_document(records_path), "resamples": resamples, "seed": seed}
    body = _post(client, "/analyze/witness", payload)
    target = Path(out) / "witness.json"
    _write_json(target, body)
    click.echo(f"<W> = {_uv(body['value'])}")
    click.echo(f"witnesses genuine four-photon entanglement: {body['witnesses_entanglement']}")
    click.echo(f"wrote {target}")


@main.command()
@click.option("--kind", type=click.Choice(["path_correlation", "hhom"]), required=True)
@click.option("--steps", type=int, default=100, show_default=True)
@click.option("--visibility", type=float, default=0.935, show_default=True, help="Path-correlation visibility.")
@click.option("--overlap", type=float, default=0.95, show_default=True, help="Spectral overlap (hhom).")
@click.option("--purity", type=float, default=0.902, show_default=True, help="Heralded purity (hhom).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(), default=".", help="Output directory.")
@click.pass_obj
def fringe(client, kind, steps, visibility, overlap, purity, fmt, out) -> None:
    """Tabulate an interference fringe and fit its visibility."""
    payload = {
        "kind": kind,
        "steps": steps,
        "visibility": visibility,
        "overlap": overlap,
        "purity": purity,
    }
    body = _post(client, "/fringe", payload)
    if fmt == "csv":
        target = Path(out) / f"fringe_{kind}.csv"
        _write_csv(target, [body["x_label"], "coincidence_probability"], body["rows"])
    else:
        target = Path(out) / f"fringe_{kind}.json"
        _write_json(target, body)
    click.echo(f"fitted visibility = {body['fitted_visibility']:.6f}")
    click.echo(f"wrote {target}")


@main.command()
@click.option("--fidelity", type=float, default=0.729, show_default=True)
@click.option("--epsilon", type=float, default=0.191, show_default=True, help="Mean AVN error rate.")
@click.option("--out", type=click.Path(), default=".", help="Output directory.")
@click.pass_obj
def calibrate(client, fidelity, epsilon, out) -> None:
    """Fit the noise model to a measured fidelity and error rate."""
    body = _post(client, "/calibrate", {"fidelity": fidelity, "epsilon_mean": epsilon})
    target = Path(out) / "calibration.json"
    _write_json(target, body)
    click.echo(f"signal weight = {body['signal_weight']:.4f}, coherence = {body['coherence']:.4f}")
    for key, value in body["predictions"].items():
        click.echo(f"  predicted {key} = {value:.4f}")
    click.echo(f"wrote {target}")


def _run_violations_ok(report: dict) -> bool:
    results = report["results"]
    if "avn" in results and not results["avn"]["violates_local_realism"]:
        return False
    if "mermin" in results:
        block = results["mermin"]
        if block["value"]["value"] <= block["classical_bound"]:
            return False
    for row in results.get("three_photon", []):
        if "epsilon_max" in row and not row.get("violates_local_realism", False):
            return False
        if "mermin_m3" in row and row["mermin_m3"]["value"]["value"] <= row["mermin_m3"]["classical_bound"]:
            return False
    return True


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None, help="Experiment config JSON.")
@click.option("--seed", type=int, default=None, help="RNG seed override (64-bit unsigned).")
@click.option("--out", type=click.Path(), default=None, help="Output directory (default: config output_dir or 'out').")
@click.option("--shots", type=int, default=None, help="Shots per setting override.")
@click.option("--resamples", type=int, default=None, help="Monte Carlo resamples override.")
@click.option("--require-violation", is_flag=True, help="Exit 2 unless every requested violation test passes its bound.")
@click.pass_obj
def run(client, config_path, seed, out, shots, resamples, require_violation) -> None:
    """Full pipeline: build the state, sample every analysis, write a report."""
    config = _load_config(config_path)
    updates: dict = {}
    sampler_updates: dict = {}
    if seed is not None:
        sampler_updates["seed"] = seed
    if shots is not None:
        sampler_updates["shots_per_setting"] = shots
    if sampler_updates:
        updates["sampler"] = config.sampler.model_copy(update=sampler_updates)
    if resamples is not None:
        updates["resamples"] = resamples
    if updates:
        try:
            config = ExperimentConfig.model_validate(
                {**config.model_dump(mode="json"), **{k: (v.model_dump(mode="json") if hasattr(v, "model_dump") else v) for k, v in updates.items()}}
            )
        except ValidationError as exc:
            _fail("invalid overrides:\n" + _format_validation_errors(exc.errors()))

    body = _post(client, "/run", config.model_dump(mode="json"))
    out_dir = Path(out or config.output_dir or "out")

    report = body["report"]
    report_path = out_dir / "report.json"
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(report_json(report))
    # Timestamp lives in a sidecar so the report itself stays reproducible.
    _write_json(out_dir / "report.meta.json",
                {"created_utc": datetime.now(timezone.utc).isoformat()})
    for name, artifact in body["artifacts"].items():
        target = out_dir / name
        if artifact["kind"] == "csv":
            _write_csv(target, artifact["header"], artifact["rows"])
        else:
            _write_json(target, artifact["body"])

    results = report["results"]
    if "tomo" in results:
        click.echo(f"fidelity = {_uv(results['tomo']['fidelity'])}")
    if "avn" in results:
        click.echo(f"epsilon_mean = {_uv(results['avn']['epsilon_mean'])}, "
                   f"epsilon_max = {_uv(results['avn']['epsilon_max'])}")
    if "mermin" in results:
        click.echo(f"Mermin M4 = {_uv(results['mermin']['value'])}")
    if "witness" in results:
        click.echo(f"<W> = {_uv(results['witness']['value'])}")
    for row in results.get("three_photon", []):
        parts = [f"photon {row['projected_photon']}"]
        if "fidelity" in row:
            parts.append(f"F = {_uv(row['fidelity'])}")
        if "epsilon_max" in row:
            parts.append(f"eps_max = {_uv(row['epsilon_max'])}")
        if "mermin_m3" in row:
            parts.append(f"M3 = {_uv(row['mermin_m3']['value'])}")
        click.echo(", ".join(parts))
    click.echo(f"wrote {report_path}")
    if require_violation and not _run_violations_ok(report):
        sys.exit(2)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("ghzsim.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
