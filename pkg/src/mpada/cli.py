"""Headless front end: run plans, launch the simulator or service, and invoke
the analysis pipelines.

Exit codes for `run`: 0 complete, 1 configuration/connection error, 2 aborted.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from .analysis import (TomographyDataset, coherent_subtract_time_domain,
                       delay_statistics, interval_errors, peak_bins)
from .datastore import (parse_timeseries_csv, read_touchstone,
                        write_session_archive)
from .engine import AcquisitionPlan, SessionState, run_plan
from .errors import MpadaError, PlanValidationError
from .rig import build_rig
from .simulator import SimVna, SimVnaServer, make_scenario


@click.group()
def main():
    """Multi-port time-series S-parameter acquisition."""


@main.command()
@click.option("--plan", "plan_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--address", default=None, help="Instrument address; overrides the plan's.")
@click.option("--out", "out_dir", default="mpada-data", type=click.Path(file_okay=False))
@click.option("--duration-override", type=float, default=None, help="Duration in ms.")
@click.option("--seed", type=int, default=None, help="Simulator seed.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable run summary on stdout.")
def run(plan_file, address, out_dir, duration_override, seed, as_json):
    """Execute a plan file and archive the session."""
    try:
        plan = AcquisitionPlan.from_json(Path(plan_file).read_text())
        if duration_override is not None:
            plan.duration_ms = duration_override
        if seed is not None:
            plan.seed = seed
    except MpadaError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    try:
        rig = build_rig(plan, address)
    except MpadaError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    try:
        session = run_plan(plan, rig.devices)
    except PlanValidationError as exc:
        for violation in exc.violations:
            click.echo(f"plan violation: {violation}", err=True)
        sys.exit(1)
    except MpadaError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    finally:
        rig.close()

    session_dir = write_session_archive(session, out_dir)
    summary = {
        "session_id": session.id,
        "state": session.state.value,
        "partial": session.partial,
        "sample_counts": session.sample_counts(),
        "out_dir": str(session_dir),
    }
    if as_json:
        click.echo(json.dumps(summary))
    else:
        click.echo(f"session {session.id}: {session.state.value}, "
                   f"samples {summary['sample_counts']} -> {session_dir}")
    sys.exit(0 if session.state == SessionState.COMPLETE else 2)


def _load_s2p_matrix(paths: list[Path]):
    rows, grid = [], None
    for path in sorted(paths):
        data = read_touchstone(path.read_bytes())
        trace = data.to_trace()
        if grid is None:
            grid = trace.grid
        elif (grid.start_hz, grid.stop_hz, grid.n_points) != \
                (trace.grid.start_hz, trace.grid.stop_hz, trace.grid.n_points):
            raise MpadaError(f"{path}: frequency grid differs from the first file")
        rows.append(trace.values)
    if not rows:
        raise MpadaError("no s2p files found")
    return np.array(rows), grid


@main.group()
def analyze():
    """Analysis pipelines over archived data."""


@analyze.command()
@click.option("--sp", "sp_dir", required=True, type=click.Path(exists=True),
              help="Directory of s2p files, phantom present (one file per angle).")
@click.option("--so", "so_dir", required=True, type=click.Path(exists=True),
              help="Directory of s2p files, no phantom.")
@click.option("--out", "out_dir", default="analysis-out", type=click.Path(file_okay=False))
def clutter(sp_dir, so_dir, out_dir):
    """Coherent subtraction + IFFT; emits |delta s| matrix and peak-bin table."""
    try:
        sp_mat, grid = _load_s2p_matrix(sorted(Path(sp_dir).glob("*.s2p")))
        so_mat, grid2 = _load_s2p_matrix(sorted(Path(so_dir).glob("*.s2p")))
        sp = TomographyDataset(s21=sp_mat, grid=grid, position="p")
        so = TomographyDataset(s21=so_mat, grid=grid2, position="none")
        delta = coherent_subtract_time_domain(sp, so)
    except MpadaError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "delta_magnitude.csv", np.abs(delta), delimiter=",", fmt="%.17g")
    bins = peak_bins(delta)
    with open(out / "peak_bins.csv", "w") as fh:
        fh.write("angle,peak_bin\n")
        for m, b in enumerate(bins):
            fh.write(f"{m},{b}\n")
    click.echo(f"wrote {out / 'delta_magnitude.csv'} and {out / 'peak_bins.csv'}")


@analyze.command()
@click.option("--csv", "csv_file", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Modality CSV with a t_ms column.")
@click.option("--target-ms", required=True, type=float)
@click.option("--out", "out_dir", default="analysis-out", type=click.Path(file_okay=False))
def jitter(csv_file, target_ms, out_dir):
    """Interval-error statistics and empirical CDF for one modality."""
    try:
        header, rows = parse_timeseries_csv(Path(csv_file).read_bytes())
        if "t_ms" not in header or not rows:
            raise MpadaError("CSV has no t_ms data")
        t_col = header.index("t_ms")
        timestamps = [row[t_col] for row in rows]
        tau = interval_errors(timestamps, target_ms)
        stats = delay_statistics(tau)
    except MpadaError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "delay_stats.csv", "w") as fh:
        fh.write("mse_ms2,variance_ms2,mean_abs_ms,n\n")
        fh.write(f"{stats.mse_ms2:.17g},{stats.variance_ms2:.17g},"
                 f"{stats.mean_abs_ms:.17g},{len(stats.tau_ms)}\n")
    with open(out / "cdf.csv", "w") as fh:
        fh.write("d_ms,probability\n")
        for d, p in stats.cdf:
            fh.write(f"{d:.17g},{p:.17g}\n")
    click.echo(f"MSE {stats.mse_ms2:.3f} ms^2, mean {stats.mean_abs_ms:.3f} ms "
               f"-> {out / 'delay_stats.csv'}")


@main.command()
@click.option("--scenario", default="ideal",
              help="ideal | loop | tomography[:position]")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=5025)
@click.option("--seed", type=int, default=None)
@click.option("--latency-jitter-ms", type=float, default=0.0)
def sim(scenario, host, port, seed, latency_jitter_ms):
    """Run the simulated VNA SCPI server in the foreground."""
    kind = scenario.split(":", 1)
    params = {}
    if kind[0] == "tomography" and len(kind) == 2:
        params["position"] = kind[1]
    scn = make_scenario(kind[0], **params)
    vna = SimVna(scenario=scn, seed=seed, latency_jitter_ms=latency_jitter_ms)
    server = SimVnaServer(vna, host=host, port=port).start()
    click.echo(f"simulated VNA ({scn.name}) on {server.address_string}")
    try:
        server._thread.join()
    except KeyboardInterrupt:
        server.stop()


@main.command()
@click.option("--bind", default=None, help="host:port; default from MPADA_BIND_ADDR.")
@click.option("--data-dir", default=None)
def serve(bind, data_dir):
    """Run the HTTP control plane (and the operator UI if built)."""
    import uvicorn

    from .service import create_app

    bind = bind or os.environ.get("MPADA_BIND_ADDR", "127.0.0.1:8000")
    host, _, port = bind.rpartition(":")
    uvicorn.run(create_app(data_dir=data_dir), host=host or "127.0.0.1", port=int(port))


if __name__ == "__main__":
    main()
