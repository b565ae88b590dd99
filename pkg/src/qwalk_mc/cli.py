"""
Command-line entry point.

    qwalk simulate --mode discrete_mc --coin hadamard --steps 6 --samples 1e7 --out results
    qwalk compare --coin hadamard --steps 6 --samples 1e8 --seed 7
    qwalk convergence --coin hadamard --steps 4 --grid 1e4,1e5,1e6,1e7

Exit status: 0 on success (variance advisories are printed as warnings),
2 for configuration errors, 3 for engine errors, 4 for I/O errors.
"""

from __future__ import annotations

import csv
import json
import logging
import sys
import warnings
from pathlib import Path

import click
import numpy as np

from . import plotting
from .analysis import amplitude_error, convergence_study, probability_std_error, total_variation
from .config import FORMATS, MODES, ExperimentConfig, build_config, load_manifest
from .core import coin_from_euler, point_mass_state, ScalarState
from .errors import ConfigError, QuantumWalkError, VarianceAdvisory
from .montecarlo import WORKERS_ENV, estimate_continuous, estimate_discrete
from .reference import LatticeGenerator, bessel_propagator, distribution, evolve_coined, evolve_continuous
from .series import nstep_bruteforce

__all__ = ["run", "main", "cli"]

log = logging.getLogger("qwalk_mc")


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path: Path, header: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def write_json(path: Path, payload: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
    return path


def _coined_table(state, se_plus=None, se_minus=None, se_p=None):
    header = ["x", "p", "re_plus", "im_plus", "re_minus", "im_minus"]
    if se_plus is not None:
        header += ["se_plus", "se_minus", "se_p"]
    probs = np.abs(state.amp_plus) ** 2 + np.abs(state.amp_minus) ** 2
    rows = []
    for i, x in enumerate(state.positions):
        a, b = state.amp_plus[i], state.amp_minus[i]
        row = [x, probs[i], a.real, a.imag, b.real, b.imag]
        if se_plus is not None:
            row += [se_plus[i], se_minus[i], se_p[i]]
        rows.append(row)
    return header, rows


def _scalar_table(state, se=None, se_p=None):
    header = ["x", "p", "re", "im"] + (["se", "se_p"] if se is not None else [])
    rows = []
    for i, x in enumerate(state.positions):
        a = state.amps[i]
        row = [x, abs(a) ** 2, a.real, a.imag]
        if se is not None:
            row += [se[i], se_p[i]]
        rows.append(row)
    return header, rows


def _emit(config: ExperimentConfig, header, rows, payload, figure) -> list[Path]:
    """Write the table, the JSON report and the figure in the requested formats."""
    stem = config.out_dir / config.mode
    written = []
    if "csv" in config.formats:
        written.append(write_csv(stem.with_suffix(".csv"), header, rows))
    if "json" in config.formats:
        written.append(write_json(stem.with_suffix(".json"), payload))
    for fmt in ("svg", "png"):
        if fmt in config.formats:
            written.append(figure(stem.with_suffix("." + fmt)))
    return written


def _discrete_reference(config: ExperimentConfig):
    return evolve_coined(point_mass_state(config.init), coin_from_euler(config.coin), config.steps)


def _run_discrete(config: ExperimentConfig):
    payload = {"config": config.echo()}
    if config.mode == "discrete_mc":
        report = estimate_discrete(
            config.coin, config.init, config.steps, config.samples, config.seed, config.workers
        )
        se_p = probability_std_error(report)
        header, rows = _coined_table(report.state, report.std_err_plus, report.std_err_minus, se_p)
        payload.update(mass=report.state.norm_sq, max_weight=report.max_weight, sector_sample_reuse=True)
        state, errors = report.state, se_p
        log.info("sampled %d trajectories in %.2fs", report.samples, report.wall_time)
    else:
        if config.mode == "discrete_series":
            state = nstep_bruteforce(config.init, config.coin, config.steps)
        else:
            state = _discrete_reference(config)
        header, rows = _coined_table(state)
        payload.update(mass=state.norm_sq)
        errors = None
    probs = [r[1] for r in rows]

    def figure(path):
        return plotting.plot_distribution(
            state.positions, probs, path, title=f"{config.mode}, n = {config.steps}", errors=errors
        )

    return header, rows, payload, figure


def _run_continuous(config: ExperimentConfig):
    gen = LatticeGenerator(config.rate)
    init = ScalarState.delta(0)
    payload = {"config": config.echo()}
    if config.mode == "continuous_mc":
        report = estimate_continuous(gen, init, config.time, config.samples, config.seed, config.workers)
        se_p = probability_std_error(report)
        header, rows = _scalar_table(report.state, report.std_err, se_p)
        payload.update(mass=report.state.norm_sq, max_weight=report.max_weight)
        state, errors = report.state, se_p
        log.info("sampled %d jump chains in %.2fs", report.samples, report.wall_time)
    else:
        state = evolve_continuous(init, gen, config.time)
        header, rows = _scalar_table(state)
        bessel = bessel_propagator(state.positions, config.rate * config.time)
        payload.update(mass=state.norm_sq, max_abs_bessel_error=float(np.max(np.abs(state.amps - bessel))))
        errors = None
    probs = [r[1] for r in rows]

    def figure(path):
        return plotting.plot_distribution(
            state.positions, probs, path, title=f"{config.mode}, t = {config.time:g}", errors=errors
        )

    return header, rows, payload, figure


def _run_compare(config: ExperimentConfig):
    if config.continuous:
        gen = LatticeGenerator(config.rate)
        init = ScalarState.delta(0)
        report = estimate_continuous(gen, init, config.time, config.samples, config.seed, config.workers)
        reference = evolve_continuous(init, gen, config.time)
        lo, hi = min(reference.x_min, report.state.x_min), max(reference.x_max, report.state.x_max)
        ref_state, mc_state = reference.padded(lo, hi), report.state.padded(lo, hi)
        se_full = np.zeros(hi - lo + 1)
        off = report.state.x_min - lo
        se_full[off : off + report.state.amps.size] = probability_std_error(report)
        positions = ref_state.positions
        p_ref = np.abs(ref_state.amps) ** 2
        p_mc = np.abs(mc_state.amps) ** 2
        l2 = float(np.linalg.norm(mc_state.amps - ref_state.amps))
        phase = None
    else:
        report = estimate_discrete(
            config.coin, config.init, config.steps, config.samples, config.seed, config.workers
        )
        reference = _discrete_reference(config)
        cmp = amplitude_error(report.state, reference, align_phase=True)
        positions = reference.positions
        p_ref = np.array([distribution(reference)[int(x)] for x in positions])
        p_mc = np.array([distribution(report.state)[int(x)] for x in positions])
        se_full = probability_std_error(report)
        l2 = amplitude_error(report.state, reference, align_phase=False).l2_amp_error
        phase = cmp.aligned_phase
    dist_ref = dict(zip(positions.tolist(), p_ref.tolist()))
    dist_mc = dict(zip(positions.tolist(), p_mc.tolist()))
    tvd = total_variation(dist_ref, dist_mc, renormalize=True)
    bound = np.maximum(5 * se_full, 1e-12)
    within = np.abs(p_ref - p_mc) <= bound
    payload = {
        "config": config.echo(),
        "tvd": tvd,
        "l2_amp_error": l2,
        "aligned_phase": phase,
        "mass_reference": float(p_ref.sum()),
        "mass_mc": float(p_mc.sum()),
        "sites_within_5se": int(within.sum()),
        "sites": int(within.size),
        "max_weight": report.max_weight,
    }
    header = ["x", "p_reference", "p_mc", "se"]
    rows = [[x, a, b, s] for x, a, b, s in zip(positions, p_ref, p_mc, se_full)]
    log.info("tvd %.4g from %d samples in %.2fs", tvd, report.samples, report.wall_time)

    def figure(path):
        return plotting.plot_comparison(positions, p_ref, p_mc, path, se=se_full)

    return header, rows, payload, figure


def _run_convergence(config: ExperimentConfig):
    study = convergence_study(
        config.coin, config.init, config.steps, config.grid, config.seed, config.workers, config.replicates
    )
    header = ["M", "tvd", "tvd_sd", "l2"]
    rows = [[r["M"], r["tvd"], r["tvd_sd"], r["l2"]] for r in study.rows]
    payload = {"config": config.echo(), "slope": study.slope, "converging": study.converging, "rows": study.rows}

    def figure(path):
        return plotting.plot_convergence([r["M"] for r in study.rows], [r["tvd"] for r in study.rows], study.slope, path)

    return header, rows, payload, figure


def run(config: ExperimentConfig) -> dict:
    """
    Execute one experiment and write its artifacts.

    Returns the JSON payload with an added ``files`` list. Variance advisories
    raised by the estimators are collected under ``warnings``.
    """
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", VarianceAdvisory)
        if config.mode == "compare":
            header, rows, payload, figure = _run_compare(config)
        elif config.mode == "convergence":
            header, rows, payload, figure = _run_convergence(config)
        elif config.continuous:
            header, rows, payload, figure = _run_continuous(config)
        else:
            header, rows, payload, figure = _run_discrete(config)
    advisories = sorted({str(w.message) for w in caught if issubclass(w.category, VarianceAdvisory)})
    if advisories:
        payload["warnings"] = advisories
    files = _emit(config, header, rows, payload, figure)
    return dict(payload, files=[str(f) for f in files])


def _common_options(fn):
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="YAML experiment manifest."),
        click.option("--coin", help="Named coin preset (hadamard)."),
        click.option("--angles", help="Euler angles delta,lambda1,lambda2,lambda3 in radians."),
        click.option("--alpha", help="Coin +1 amplitude at the origin as RE,IM."),
        click.option("--beta", help="Coin -1 amplitude at the origin as RE,IM."),
        click.option("--steps", type=int, help="Number of coined steps."),
        click.option("--time", "time_", type=float, help="Continuous-time horizon."),
        click.option("--rate", type=float, help="Continuous-time rate lambda (default 1)."),
        click.option("--samples", type=float, help="Monte Carlo sample count M (1e8 style accepted)."),
        click.option("--seed", type=int),
        click.option("--workers", type=int, envvar=WORKERS_ENV, help=f"Sampling threads [env {WORKERS_ENV}]."),
        click.option("--out", type=click.Path(file_okay=False), help="Output directory."),
        click.option(
            "--format", "formats", multiple=True, type=click.Choice(FORMATS), help="Outputs to write (repeatable)."
        ),
        click.option("-v", "--verbose", is_flag=True),
    ]
    for opt in reversed(options):
        fn = opt(fn)
    return fn


def _execute(mode, config_path, verbose, **flags):
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(message)s")
    manifest = load_manifest(config_path) if config_path else {}
    overrides = {
        "mode": mode,
        "coin": flags.get("coin"),
        "angles": flags.get("angles"),
        "alpha": flags.get("alpha"),
        "beta": flags.get("beta"),
        "steps": flags.get("steps"),
        "time": flags.get("time_"),
        "rate": flags.get("rate"),
        "samples": flags.get("samples"),
        "seed": flags.get("seed"),
        "workers": flags.get("workers"),
        "out": flags.get("out"),
        "format": list(flags["formats"]) if flags.get("formats") else None,
        "grid": flags.get("grid"),
        "replicates": flags.get("replicates"),
    }
    if overrides["angles"] is not None:
        manifest.pop("coin", None)
    if overrides["coin"] is not None:
        manifest.pop("angles", None)
    if overrides["steps"] is not None:
        manifest.pop("time", None)
    if overrides["time"] is not None:
        manifest.pop("steps", None)
    config = build_config(mode or "discrete_mc", manifest, overrides)
    result = run(config)
    for message in result.get("warnings", []):
        click.echo(f"warning: {message}", err=True)
    if "tvd" in result:
        click.echo(f"tvd {result['tvd']:.6g}")
    if "slope" in result:
        click.echo(f"slope {result['slope']:.4f} ({'converging' if result['converging'] else 'not converging'})")
    for f in result["files"]:
        click.echo(f)


@click.group()
def cli():
    """Quantum walks on the integer line: unitary references and Poisson-sampling estimators."""


@cli.command()
@click.option("--mode", type=click.Choice([m for m in MODES if m not in ("compare", "convergence")]))
@_common_options
def simulate(mode, config_path, verbose, **flags):
    """Run one engine and write its amplitudes and distribution."""
    _execute(mode, config_path, verbose, **flags)


@cli.command()
@_common_options
def compare(config_path, verbose, **flags):
    """Sample the walk and compare against exact evolution."""
    _execute("compare", config_path, verbose, **flags)


@cli.command()
@click.option("--grid", help="Comma-separated increasing sample counts.")
@click.option("--replicates", type=int, help="Independent runs averaged per grid point (default 8).")
@_common_options
def convergence(config_path, verbose, **flags):
    """Fit the decay of the total-variation error with the sample count."""
    _execute("convergence", config_path, verbose, **flags)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="qwalk", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 2
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except QuantumWalkError as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 4
    except click.Abort:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
