"""Command-line entry point: physics dumps, power optimization, simulation.

All outputs are written atomically (temp file + rename) and embed the
resolved config hash, the seed, and the artifact version, so reruns with
identical inputs are byte-identical.
"""

import json
import os
import tempfile

import click
import numpy as np

from . import plotting
from .cache import PhysicsCache
from .config import ARTIFACT_VERSION, GRID_PLANS, load_config
from .constants import MODULATION_FORMATS
from .errors import ClbandError
from .gsnr import span_operating_point
from .optimizer import (
    MrdTable,
    OptimizationProblem,
    build_caches,
    optimize_band_power,
    reach_vector,
)
from .sim import EFF, ELF, SimReport, run_simulation
from .topology import builtin_topology, load_topology
from .units import w_to_dbm


def _atomic_write_text(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _out_path(out_dir, name):
    base = out_dir or os.environ.get("CLBAND_OUT_DIR", ".")
    os.makedirs(base, exist_ok=True)
    return os.path.join(base, name)


def _provenance(cfg, seed):
    return {
        "config_hash": cfg.config_hash(),
        "seed": seed,
        "artifact_version": ARTIFACT_VERSION,
    }


def _load(ctx):
    params = ctx.obj
    cfg = load_config(params["config"])
    if params["grid"]:
        cfg = cfg.with_grid_plan(params["grid"])
    return cfg


def _disk_cache(ctx, cfg):
    base = ctx.obj["out_dir"] or os.environ.get("CLBAND_OUT_DIR", ".")
    return PhysicsCache(os.path.join(base, ".clband-cache"), enabled=cfg.cache_enabled)


class _Group(click.Group):
    """Translates library errors into clean nonzero-exit messages."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except ClbandError as exc:
            raise click.ClickException(str(exc)) from None


@click.group(cls=_Group)
@click.option("--config", type=click.Path(), default=None, help="JSON config file.")
@click.option(
    "--grid", type=click.Choice(sorted(GRID_PLANS)), default=None,
    help="Named channel-plan override.",
)
@click.option("--out-dir", type=click.Path(), default=None,
              help="Output directory (or CLBAND_OUT_DIR).")
@click.pass_context
def main(ctx, config, grid, out_dir):
    """C+L-band GSNR estimation, launch-power optimization, and RMSA simulation."""
    ctx.obj = {"config": config, "grid": grid, "out_dir": out_dir}


@main.command("gsnr-profile")
@click.option("--power", type=float, default=-0.15, show_default=True,
              help="Uniform launch power [dBm].")
@click.option("--out", "out_name", default="profile.csv", show_default=True)
@click.option("--figure", is_flag=True, help="Also render a PNG next to the CSV.")
@click.pass_context
def gsnr_profile(ctx, power, out_name, figure):
    """Dump per-channel received power, NLI coefficient, and ASE as CSV."""
    cfg = _load(ctx)
    grid = cfg.grid.build()
    op = span_operating_point(
        grid, cfg.fiber, cfg.amplifier, power, engine=cfg.nli.engine
    )
    rows = {
        "p_rx_dbm": w_to_dbm(op.received_w),
        "eta_per_w2": op.eta_per_w2,
        "p_ase_dbm": w_to_dbm(op.p_ase_w),
    }
    path = _out_path(ctx.obj["out_dir"], out_name)
    lines = ["channel_index,center_THz,band,p_rx_dBm,eta_per_W2,p_ase_dBm"]
    prov = _provenance(cfg, cfg.seed)
    lines.insert(
        0,
        f"# config_hash={prov['config_hash']} seed={prov['seed']} "
        f"version={prov['artifact_version']} power_dbm={power}",
    )
    for ch in grid.channels:
        i = ch.index - 1
        lines.append(
            f"{ch.index},{ch.center_hz / 1e12:.4f},{ch.band.value},"
            f"{rows['p_rx_dbm'][i]:.6f},{rows['eta_per_w2'][i]:.6f},"
            f"{rows['p_ase_dbm'][i]:.6f}"
        )
    _atomic_write_text(path, "\n".join(lines) + "\n")
    if figure:
        plotting.save_profile_figure(grid, rows, path.rsplit(".", 1)[0] + ".png")
    click.echo(f"wrote {path}")


def _problem_from_config(cfg, seed):
    return OptimizationProblem(
        grid=cfg.grid.build(),
        fiber=cfg.fiber,
        amplifier=cfg.amplifier,
        formats=MODULATION_FORMATS,
        snr_trx_db=cfg.optimizer.snr_trx_db,
        aging_margin_db=cfg.optimizer.aging_margin_db,
        p_min_dbm=cfg.optimizer.p_min_dbm,
        p_max_dbm=cfg.optimizer.p_max_dbm,
        pso=cfg.optimizer.pso(seed),
        engine=cfg.nli.engine,
        correction_enabled=cfg.nli.correction_enabled,
        power_resolution_db=cfg.optimizer.power_resolution_db,
    )


@main.command("optimize-power")
@click.option("--seed", type=int, default=None, help="Swarm seed (default: config).")
@click.option("--out", "out_name", default="mrd_table.json", show_default=True)
@click.option("--figure", is_flag=True)
@click.pass_context
def optimize_power(ctx, seed, out_name, figure):
    """Solve the band-wide launch-power problem; write the reach table."""
    cfg = _load(ctx)
    seed = cfg.seed if seed is None else seed
    problem = _problem_from_config(cfg, seed)
    caches = build_caches(problem, _disk_cache(ctx, cfg), cfg.config_hash())
    table = optimize_band_power(problem, caches=caches)
    doc = {**_provenance(cfg, seed), **table.to_dict()}
    path = _out_path(ctx.obj["out_dir"], out_name)
    _atomic_write_text(path, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    if figure:
        plotting.save_mrd_figure(
            problem.grid, table, path.rsplit(".", 1)[0] + ".png"
        )
    click.echo(
        f"optimum {table.optimum_power_dbm:+.2f} dBm, reach "
        f"{[r for _, r, _ in table.per_format]} -> {path}"
    )


@main.command("mrd-table")
@click.option("--power", type=float, required=True, help="Launch power [dBm].")
@click.option("--out", "out_name", default="mrd_table.json", show_default=True)
@click.option("--figure", is_flag=True)
@click.pass_context
def mrd_table(ctx, power, out_name, figure):
    """Recompute the reach table at a given launch power (no optimization)."""
    cfg = _load(ctx)
    problem = _problem_from_config(cfg, cfg.seed)
    caches = build_caches(problem, _disk_cache(ctx, cfg), cfg.config_hash())
    per_channel = np.array(
        [
            reach_vector(
                caches[f.m], f, power,
                problem.snr_trx_db, problem.aging_margin_db,
            )
            for f in problem.formats
        ]
    )
    per_format = tuple(
        (f.m, int(row.min()), int(np.argmin(row)) + 1)
        for row, f in zip(per_channel, problem.formats)
    )
    table = MrdTable(
        optimum_power_dbm=float(power),
        per_format=per_format,
        n_span=tuple(r for _, r, _ in per_format),
        p_min_dbm=float(power),
        p_max_dbm=float(power),
        per_channel=per_channel,
    )
    doc = {**_provenance(cfg, cfg.seed), **table.to_dict()}
    path = _out_path(ctx.obj["out_dir"], out_name)
    _atomic_write_text(path, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    if figure:
        plotting.save_mrd_figure(problem.grid, table, path.rsplit(".", 1)[0] + ".png")
    click.echo(f"reach at {power:+.2f} dBm: {[r for _, r, _ in per_format]} -> {path}")


@main.command("simulate")
@click.option("--topology", "topology_path", default="builtin", show_default=True,
              help="Topology JSON file or 'builtin'.")
@click.option("--mrd-table", "mrd_path", type=click.Path(), required=True,
              help="Reach table JSON from optimize-power.")
@click.option("--policy", type=click.Choice([EFF, ELF, "both"]), default="both",
              show_default=True)
@click.option("--otl-grid", default=None,
              help="Comma-separated offered loads (default: config).")
@click.option("--seeds", type=int, default=None, help="Base seed (default: config).")
@click.option("--demands", type=int, default=None,
              help="Demands per replication (default: config).")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Parallel workers over (OTL, replication) points.")
@click.option("--out", "out_name", default="report.json", show_default=True)
@click.pass_context
def simulate(ctx, topology_path, mrd_path, policy, otl_grid, seeds, demands, jobs,
             out_name):
    """Run the dynamic EFF/ELF lightpath study on a mesh topology."""
    cfg = _load(ctx)
    sim = cfg.simulation
    topo = builtin_topology() if topology_path == "builtin" else load_topology(topology_path)
    try:
        with open(mrd_path) as fh:
            table = MrdTable.from_dict(json.load(fh))
    except OSError as exc:
        raise ClbandError(f"cannot read MRD table {mrd_path}: {exc}") from None
    grid_obj = cfg.grid.build()
    otls = (
        tuple(float(x) for x in otl_grid.split(","))
        if otl_grid
        else tuple(sim.otl_grid)
    )
    policies = (EFF, ELF) if policy == "both" else (policy,)
    report = run_simulation(
        grid_obj, cfg.fiber, cfg.amplifier, topo, table,
        otl_grid=otls,
        policies=policies,
        replications=sim.replications,
        n_demands=demands if demands is not None else sim.n_demands,
        seed=seeds if seeds is not None else cfg.seed,
        k_paths=sim.k_paths,
        warmup_frac=sim.warmup_frac,
        snr_trx_db=cfg.optimizer.snr_trx_db,
        mean_holding=sim.mean_holding,
        engine=cfg.nli.engine,
        jobs=jobs,
        disk_cache=_disk_cache(ctx, cfg),
        config_hash=cfg.config_hash(),
    )
    doc = {**_provenance(cfg, seeds if seeds is not None else cfg.seed),
           **report.to_dict()}
    path = _out_path(ctx.obj["out_dir"], out_name)
    _atomic_write_text(path, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    click.echo(f"wrote {path}")


@main.command("report")
@click.option("--in", "in_name", default="report.json", show_default=True)
@click.option("--out", "out_name", default="report.csv", show_default=True)
@click.option("--figure/--no-figure", default=True, show_default=True)
@click.pass_context
def report(ctx, in_name, out_name, figure):
    """Convert a simulation report to CSV (and a PNG figure)."""
    try:
        with open(in_name) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ClbandError(f"cannot read report {in_name}: {exc}") from None
    rep = SimReport.from_dict(doc)
    rows = rep.summary_rows()
    path = _out_path(ctx.obj["out_dir"], out_name)
    lines = ["otl,policy,bbp,bbp_ci,mean_gsnr_db,gsnr_ci"]
    for r in rows:
        lines.append(
            f"{r['otl']},{r['policy']},{r['bbp']:.6g},{r['bbp_ci']:.6g},"
            f"{r['mean_gsnr_db']:.4f},{r['gsnr_ci']:.4f}"
        )
    _atomic_write_text(path, "\n".join(lines) + "\n")
    if figure:
        plotting.save_report_figure(rows, path.rsplit(".", 1)[0] + ".png")
    click.echo(f"wrote {path}")


def dispatch(argv=None):
    """Library-level dispatch; returns the process exit status."""
    try:
        main.main(args=argv, standalone_mode=False)
        return 0
    except ClbandError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return 130


if __name__ == "__main__":
    raise SystemExit(dispatch())
