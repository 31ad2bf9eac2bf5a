"""Command-line entry point.

Every subcommand writes its outputs and a ``manifest.json`` into ``--out``.
Exit status: 0 when every check passes, 1 when a check is falsified, 2 on
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from . import diagnostics as dg
from .config import ConfigError, RunConfig, config_from_dict, parse_config, resolved_dict
from .io import RunManifest, sha256_file, write_json, write_series, write_snapshot
from .model import analytic_datum, energy_E_sigma, random_ensemble
from .solver import (
    BlowUpError,
    SolverConfig,
    continuation_run,
    evolve,
    local_timespan,
)
from .spectral import GevreyParams, make_grid, weighted_norm

log = logging.getLogger("kdvbbm")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_CONFIG = {"params": {"gamma1": 1.0, "delta1": 1.0}}


class UsageError(Exception):
    pass


class Run:
    """Output directory, manifest and console reporting for one subcommand."""

    def __init__(self, name: str, cfg: RunConfig, args: dict, out: Path, quiet: bool):
        self.name = name
        self.cfg = cfg
        self.out = out
        self.quiet = quiet
        self.out.mkdir(parents=True, exist_ok=True)
        self.calibration: dict = {}
        self.manifest = RunManifest(
            tool_version=__version__,
            subcommand=name,
            args=args,
            config_echo=resolved_dict(cfg),
            calibration={},
            grid={"n_modes": cfg.grid.n, "length": cfg.grid.L},
            params=cfg.params.model_params().as_dict(),
        )

    def path(self, rel: str) -> Path:
        p = self.out / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def record(self, rel: str) -> Path:
        """Register an already written output file."""
        p = self.out / rel
        self.manifest.add_output(p, self.out)
        return p

    def say(self, msg: str) -> None:
        if not self.quiet:
            print(msg)

    def check(self, label: str, ok: bool, detail: str = "") -> bool:
        self.say(f"[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else ""))
        return ok

    def finish(self, passed: bool, summary: dict) -> int:
        self.manifest.calibration = self.calibration
        self.manifest.passed = bool(passed)
        self.manifest.summary = summary
        self.manifest.write(self.out / "manifest.json")
        return EXIT_PASS if passed else EXIT_FAIL


# -- shared setup --------------------------------------------------------


def _grid(cfg):
    return make_grid(cfg.grid.n, cfg.grid.L)


def _long_grid(cfg):
    return make_grid(cfg.radius.n, cfg.radius.L or cfg.grid.L)


def _datum(cfg, grid):
    d = cfg.datum
    return analytic_datum(
        grid,
        seed=cfg.datum_seed,
        amplitude=d.amplitude,
        width=d.width,
        radius=d.radius,
        center_spread=d.center_spread,
        skew=d.skew,
    )


def _picard_fields(cfg):
    pc = cfg.picard
    return dg.picard_ensemble(make_grid(pc.n, pc.L), cfg.seed, pc.count)


def _contraction_c(run: Run, threads: int) -> float:
    cal = run.cfg.calibration
    if "contraction_c" in run.calibration:
        return run.calibration["contraction_c"]["value"]
    if cal.contraction_c is not None:
        c, prov = cal.contraction_c, cal.provenance.get("contraction_c", "config")
    else:
        pc = run.cfg.picard
        log.info("calibrating contraction constant on %d-member ensemble", pc.count)
        c = dg.calibrate_contraction(
            _picard_fields(run.cfg),
            run.cfg.params.model_params(),
            sigma=pc.sigma,
            target=pc.calibration_target,
            n_nodes=pc.calibration_nodes,
            n_iters=pc.iters,
            threads=threads,
        )
        prov = (
            f"bisection: smallest c with all Picard ratios <= {pc.calibration_target} "
            f"(ensemble seed={run.cfg.seed}, count={pc.count}, N={pc.n}, L={pc.L}, "
            f"sigma={pc.sigma}, nodes={pc.calibration_nodes})"
        )
    run.calibration["contraction_c"] = {"value": float(c), "provenance": prov}
    return float(c)


def _ac_t_span(cfg, eta0, c) -> float:
    ac = cfg.almost_conservation
    if ac.t_span is not None:
        return ac.t_span
    norm = weighted_norm(eta0, GevreyParams(max(ac.sigmas), 2.0))
    return local_timespan(norm, c)


def _run_almost_conservation(run: Run, threads: int):
    cfg = run.cfg
    p = cfg.params.model_params()
    eta0 = _datum(cfg, _grid(cfg))
    c = _contraction_c(run, threads) if cfg.almost_conservation.t_span is None else None
    t_span = _ac_t_span(cfg, eta0, c)
    ac = cfg.almost_conservation
    return dg.almost_conservation_experiment(
        eta0, ac.sigmas, t_span, p, dt=ac.dt, observer_stride=ac.observer_stride, span_factors=ac.span_factors
    )


def _c_hat(run: Run, threads: int) -> float:
    cal = run.cfg.calibration
    if cal.almost_conservation_C_hat is not None:
        run.calibration["almost_conservation_C_hat"] = {
            "value": cal.almost_conservation_C_hat,
            "provenance": cal.provenance.get("almost_conservation_C_hat", "config"),
        }
        return cal.almost_conservation_C_hat
    if cal.almost_conservation_constant is not None:
        const = cal.almost_conservation_constant
        prov = cal.provenance.get("almost_conservation_constant", "config")
    else:
        res = _run_almost_conservation(run, threads)
        const = res.constant
        prov = (
            "max over sigma of D/(sigma^2 T (1+E^1/2) E^3/2) on the seeded datum "
            f"(sigmas={res.sigmas}, T={res.t_span:.6g})"
        )
    run.calibration["almost_conservation_constant"] = {"value": float(const), "provenance": prov}
    cfg = run.cfg
    p = cfg.params.model_params()
    eta0 = _datum(cfg, _long_grid(cfg))
    e0 = energy_E_sigma(eta0, cfg.continuation.sigma0, p).modified_energy
    c_hat = dg.c_hat_from_constant(const, e0)
    run.calibration["almost_conservation_C_hat"] = {
        "value": float(c_hat),
        "provenance": f"from constant {const:.6g} and E_sigma0(0) = {e0:.6g} (sigma0 = {cfg.continuation.sigma0})",
    }
    return c_hat


def _report_rows(reports):
    return [
        {
            "name": r.name,
            "max_ratio": r.max_ratio,
            "argmax_input": r.argmax_input,
            "sample_count": r.sample_count,
            "violations": r.violations,
        }
        for r in reports
    ]


# -- subcommands ---------------------------------------------------------


def cmd_simulate(run: Run, a) -> int:
    cfg = run.cfg
    p = cfg.params.model_params()
    grid = _grid(cfg)
    eta0 = _datum(cfg, grid)
    sc = cfg.solver
    scfg = SolverConfig(
        dt=sc.dt,
        t_end=sc.t_end,
        method=sc.method,
        picard_quadrature_nodes=sc.picard_quadrature_nodes,
        observer_stride=sc.observer_stride,
    )
    sigmas = cfg.observe.sigmas
    ok = True
    try:
        traj = evolve(eta0, scfg, p, sigmas)
    except BlowUpError as exc:
        traj = exc.trajectory
        ok = run.check("evolution", False, str(exc))
    rows, energy_rows = [], []
    for t, snap, reps in zip(traj.times, traj.snapshots, traj.reports):
        row = {"time": t, "E": reps[0].energy if reps else energy_E_sigma(snap, 0.0, p).energy}
        for r in reps:
            row[f"E_sigma@{r.sigma:g}"] = r.modified_energy
        for r in reps:
            row[f"h2_vsigma@{r.sigma:g}"] = r.h2_norm_vsigma
        try:
            row["sigma_est"], _ = dg.estimate_radius(snap, cfg.observe.radius_floor, cfg.observe.radius_ceiling)
        except dg.InsufficientDataError:
            row["sigma_est"] = float("nan")
        rows.append(row)
        energy_rows.extend(reps)
    write_series(rows, run.path("trajectory.csv"))
    run.record("trajectory.csv")
    write_series(energy_rows, run.path("energy_reports.csv"),
                 header=["time", "energy", "modified_energy", "sigma", "h2_norm_vsigma"])
    run.record("energy_reports.csv")
    stride = cfg.observe.snapshot_stride
    keep = {0, len(traj.times) - 1}
    if stride:
        keep |= set(range(0, len(traj.times), stride))
    for i in sorted(keep):
        rel = f"snapshots/snap_{i:06d}.json"
        write_snapshot(traj.snapshots[i], {"time": traj.times[i], "params": p, "sigma_observed": sigmas}, run.path(rel))
        run.record(rel)
    e = traj.energy() if traj.reports and traj.reports[0] else np.array([r["E"] for r in rows])
    drift = float(np.max(np.abs(e - e[0])) / abs(e[0])) if e.size and e[0] != 0 else 0.0
    run.say(f"steps={len(traj.times)} t_final={traj.times[-1]:.6g} relative energy drift={drift:.3e}")
    if p.conservative_case:
        ok &= run.check("energy conservation", drift <= 1e-8, f"relative drift {drift:.3e}")
    return run.finish(ok, {"relative_energy_drift": drift, "t_final": traj.times[-1], "records": len(rows)})


def cmd_verify_lemmas(run: Run, a) -> int:
    lc = run.cfg.lemmas
    reports = dg.verify_lemmas(
        p2_points=lc.p2_points,
        p3_points=lc.p3_points,
        xi_max=lc.xi_max,
        pairs=lc.pairs,
        ab_max=lc.ab_max,
        sigma_points=lc.sigma_points,
        xi_points=lc.xi_points,
        sigma_max=lc.sigma_max,
        weight_xi_max=lc.weight_xi_max,
        seed=run.cfg.seed,
    )
    write_series(_report_rows(reports), run.path("lemmas.csv"))
    run.record("lemmas.csv")
    ok = True
    for r in reports:
        ok &= run.check(r.name, r.passed and r.max_ratio <= 1.0,
                        f"max_ratio={r.max_ratio:.6g} violations={r.violations} n={r.sample_count}")
    return run.finish(ok, {r.name: r.max_ratio for r in reports})


def cmd_verify_estimates(run: Run, a) -> int:
    cfg = run.cfg
    ec = cfg.estimates
    p = cfg.params.model_params()
    grid = make_grid(ec.n, ec.L)
    sigmas = np.geomspace(ec.sigma_min, ec.sigma_max, ec.sigma_points)
    kw = {"norm_range": (ec.norm_min, ec.norm_max)}
    key = dg.key_lemma_ratio(cfg.seed, sigmas, p, grid, count=ec.count, threads=a.threads, **kw)
    nl = dg.nonlinear_estimate_ratio(cfg.seed, sigmas, p, grid, count=ec.count, threads=a.threads, **kw)
    fields = random_ensemble(grid, ec.count, cfg.seed, **kw)
    lambdas = np.geomspace(ec.scaling_min, ec.scaling_max, ec.scaling_points)
    sc = dg.nonlinear_scaling_sweep(fields, lambdas, float(sigmas[-1]), p)
    reports = key + [nl, sc]
    rows = []
    for r in reports:
        row = _report_rows([r])[0]
        row["sigma_spread"] = r.parameters.get("sigma_spread", r.parameters.get("spread", float("nan")))
        rows.append(row)
    write_series(rows, run.path("estimates.csv"))
    run.record("estimates.csv")
    write_json({r.name: r.parameters for r in reports}, run.path("estimates.json"))
    run.record("estimates.json")

    ok = True
    for r in key:
        spread = r.parameters["sigma_spread"]
        ok &= run.check(f"trilinear {r.name}", math.isfinite(r.max_ratio) and spread < 10,
                        f"max_ratio={r.max_ratio:.6g} spread={spread:.4g}")
    tot = key[0].parameters
    ok &= run.check("trilinear sigma slope", 1.8 <= tot["slope_min"] and tot["slope_max"] <= 2.2,
                    f"per-field slopes in [{tot['slope_min']:.4f}, {tot['slope_max']:.4f}], "
                    f"{100 * tot['slope_in_tolerance_fraction']:.1f}% within 2 +- 0.2; lowest decade "
                    f"[{tot['small_sigma_slope_min']:.4f}, {tot['small_sigma_slope_max']:.4f}]")
    ch = nl.parameters["refinement_change"]
    ok &= run.check("nonlinear estimate", math.isfinite(nl.max_ratio) and nl.parameters["sigma_spread"] < 10,
                    f"max_ratio={nl.max_ratio:.6g} spread={nl.parameters['sigma_spread']:.4g}")
    ok &= run.check("nonlinear refinement N->2N", ch < 0.1, f"relative change {ch:.3e}")
    ok &= run.check("nonlinear amplitude scaling", math.isfinite(sc.max_ratio),
                    f"max_ratio={sc.max_ratio:.6g} over lambda in [{ec.scaling_min:g}, {ec.scaling_max:g}]")
    return run.finish(ok, {r.name: r.max_ratio for r in reports})


def cmd_energy_identity(run: Run, a) -> int:
    cfg = run.cfg
    p = cfg.params.model_params()
    eta0 = _datum(cfg, _grid(cfg))
    sc = cfg.solver
    traj = evolve(eta0, SolverConfig(dt=sc.dt, t_end=sc.t_end, observer_stride=sc.observer_stride), p, [])
    reports = [dg.energy_derivative_check(traj, s, p) for s in cfg.observe.sigmas]
    rows = [{"sigma": s, "convergence_factor": r.max_ratio, **{k: r.parameters[k] for k in
             ("dt", "residual_dt", "residual_2dt", "integrated_residual", "at_roundoff")}}
            for s, r in zip(cfg.observe.sigmas, reports)]
    write_series(rows, run.path("energy_identity.csv"))
    run.record("energy_identity.csv")
    ok = True
    for s, r in zip(cfg.observe.sigmas, reports):
        ok &= run.check(f"dE/dt identity sigma={s:g}", not r.parameters["resolution_insufficient"],
                        f"residual ratio under step halving {r.max_ratio:.4f}")
    return run.finish(ok, {"factors": [r.max_ratio for r in reports]})


def cmd_almost_conservation(run: Run, a) -> int:
    res = _run_almost_conservation(run, a.threads)
    rows = [
        {"sigma": s, "deviation": d, "E_sigma_initial": e, "deviation_over_sigma2": d / s**2}
        for s, d, e in zip(res.sigmas, res.deviations, res.initial_energies)
    ]
    write_series(rows, run.path("deviations.csv"))
    run.record("deviations.csv")
    span_rows = [
        {"sigma": s, "span_factor": f, "t_span": f * res.t_span, "deviation": d}
        for s, row in zip(res.sigmas, res.span_deviations)
        for f, d in zip(res.span_factors, row)
    ]
    write_series(span_rows, run.path("span.csv"))
    run.record("span.csv")
    growth = res.span_growth()
    total = max(
        (row[-1] / row[0]) / (res.span_factors[-1] / res.span_factors[0])
        for row in res.span_deviations
        if row[0] > dg.DEVIATION_FLOOR
    )
    fit = {"slope": res.fit.slope, "intercept": res.fit.intercept, "r_squared": res.fit.r_squared,
           "t_span": res.t_span, "span_growth": growth, "span_growth_total": total,
           "constant": res.constant}
    write_json(fit, run.path("fit.json"))
    run.record("fit.json")
    ok = run.check("sigma^2 scaling", abs(res.fit.slope - 2) <= 0.3 and res.fit.r_squared >= 0.98,
                   f"slope={res.fit.slope:.4f} r2={res.fit.r_squared:.5f}")
    ok &= run.check("linear growth in T", all(g <= 1.5 for g in growth) and total <= 1.5,
                    f"normalized growth per doubling {['%.3f' % g for g in growth]}, over range {total:.3f}")
    return run.finish(ok, fit)


def cmd_radius_track(run: Run, a) -> int:
    cfg = run.cfg
    rc = cfg.radius
    p = cfg.params.model_params()
    eta0 = _datum(cfg, _long_grid(cfg))
    traj = evolve(eta0, SolverConfig(dt=rc.dt, t_end=rc.t_end, observer_stride=rc.observer_stride), p, [rc.sigma0])
    track = dg.radius_track(traj, cfg.observe.radius_floor, cfg.observe.radius_ceiling)
    rows = [{"t": t, "sigma_est": s, "sigma_est_sqrt_t": s * math.sqrt(t)} for t, s in track]
    write_series(rows, run.path("radius.csv"), header=["t", "sigma_est", "sigma_est_sqrt_t"])
    run.record("radius.csv")
    fit = dg.decay_fit([t for t, _ in track], [s for _, s in track])
    out = {"alpha": fit.extra["alpha"], "r_squared": fit.r_squared, "slope": fit.slope,
           "intercept": fit.intercept, "min_sigma_sqrt_t": fit.extra["min_sigma_sqrt_t"],
           "sigma0": rc.sigma0, "t_end": rc.t_end}
    write_json(out, run.path("decay_fit.json"))
    run.record("decay_fit.json")
    m = fit.extra["min_sigma_sqrt_t"]
    ok = run.check("radius lower bound", math.isfinite(m) and m > 0,
                   f"min sigma_est*sqrt(t) = {m:.6g}, fitted alpha = {fit.extra['alpha']:.4f}")
    return run.finish(ok, out)


def cmd_continuation(run: Run, a) -> int:
    cfg = run.cfg
    cc = cfg.continuation
    t_star = a.t_star if a.t_star is not None else cc.t_star
    p = cfg.params.model_params()
    c_hat = _c_hat(run, a.threads)
    eta0 = _datum(cfg, _long_grid(cfg))
    rep = continuation_run(eta0, cc.sigma0, t_star, p, c_hat, safety=cc.safety, dt=cc.dt,
                           observer_stride=cc.observer_stride)
    write_series([{"time": t, "E_sigma": e} for t, e in zip(rep.times, rep.energies)],
                 run.path("continuation.csv"))
    run.record("continuation.csv")
    summary = rep.summary()
    write_json(summary, run.path("continuation.json"))
    run.record("continuation.json")
    ok = run.check("sup E_sigma <= 2 E_sigma0(0)", rep.bound_holds,
                   f"sigma={rep.sigma:.6g} sup={rep.sup_energy_sigma:.6g} bound={2 * rep.energy_sigma0_initial:.6g}")
    return run.finish(ok, summary)


def cmd_picard(run: Run, a) -> int:
    cfg = run.cfg
    pc = cfg.picard
    c = _contraction_c(run, a.threads)
    chk = dg.contraction_check(_picard_fields(cfg), c, cfg.params.model_params(), sigma=pc.sigma,
                               n_nodes=pc.nodes, n_iters=pc.iters, compare_steps=pc.compare_steps,
                               threads=a.threads)
    rows = [{"member": m, "iteration": k + 1, "ratio": r}
            for m, ratios in enumerate(chk.ratios) for k, r in enumerate(ratios)]
    write_series(rows, run.path("picard.csv"), header=["member", "iteration", "ratio"])
    run.record("picard.csv")
    out = {"c": c, "max_ratio": chk.max_ratio, "t_spans": chk.t_spans, "agreement": chk.agreement}
    write_json(out, run.path("picard.json"))
    run.record("picard.json")
    worst = max(chk.agreement)
    ok = run.check("contraction", chk.contraction_holds, f"max ratio {chk.max_ratio:.4f} at c={c:.6g}")
    ok &= run.check("Picard vs IFRK4", worst <= 1e-8, f"max H^(sigma,2) distance {worst:.3e}")
    return run.finish(ok, out)


def cmd_calibrate(run: Run, a) -> int:
    c = _contraction_c(run, a.threads)
    c_hat = _c_hat(run, a.threads)
    block = {
        "contraction_c": c,
        "almost_conservation_constant": run.calibration["almost_conservation_constant"]["value"],
        "almost_conservation_C_hat": c_hat,
        "provenance": {k: v["provenance"] for k, v in run.calibration.items()},
    }
    write_json({"calibration": block}, run.path("calibration.json"))
    run.record("calibration.json")
    run.say(f"contraction c = {c:.6g}, C_hat = {c_hat:.6g}")
    return run.finish(True, block)


COMMANDS = {
    "simulate": (cmd_simulate, "evolve the seeded datum and record energies"),
    "verify-lemmas": (cmd_verify_lemmas, "brute-force sweeps of the pointwise inequalities"),
    "verify-estimates": (cmd_verify_estimates, "nonlinear and trilinear estimate ratios"),
    "energy-identity": (cmd_energy_identity, "finite-difference check of dE_sigma/dt = int vN(v)"),
    "almost-conservation": (cmd_almost_conservation, "deviation of E_sigma versus sigma and T"),
    "radius-track": (cmd_radius_track, "estimated radius of analyticity over time"),
    "continuation": (cmd_continuation, "long-time bound on E_sigma with shrinking strip"),
    "picard": (cmd_picard, "contraction ratios of the Duhamel iteration"),
    "calibrate": (cmd_calibrate, "measure contraction and almost-conservation constants"),
}


# -- argument handling ---------------------------------------------------


def _common_flags(parser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=d, help="override the config seed")
    parser.add_argument("--threads", type=int, default=d if suppress else 1, help="worker threads")
    parser.add_argument("--out", default=d, help="output directory (default: runs/<subcommand>)")
    parser.add_argument("--quiet", action="store_true", default=d if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kdvbbm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    _common_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="JSON config (default: built-in reference setup)")
        sp.add_argument("--calibration", help="JSON file with a calibration block")
        if name == "continuation":
            sp.add_argument("--t-star", type=float, default=None, dest="t_star")
        _common_flags(sp, suppress=True)
    rp = sub.add_parser("reproduce", help="re-run a manifest and compare output checksums")
    rp.add_argument("manifest")
    _common_flags(rp, suppress=True)
    return parser


def _load_config(a) -> RunConfig:
    if a.config:
        cfg = parse_config(a.config)
        data = resolved_dict(cfg)
    else:
        data = json.loads(json.dumps(DEFAULT_CONFIG))
    if a.calibration:
        path = Path(a.calibration)
        if not path.is_file():
            raise ConfigError(f"calibration file not found: {path}")
        block = json.loads(path.read_text())
        data["calibration"] = block.get("calibration", block)
    if a.seed is not None:
        data["seed"] = a.seed
    return config_from_dict(data)


def _run_args(a) -> dict:
    out = {"seed": a.seed, "threads": a.threads}
    if getattr(a, "t_star", None) is not None:
        out["t_star"] = a.t_star
    return out


def execute(command: str, cfg: RunConfig, run_args: dict, out: Path, quiet: bool) -> int:
    fn = COMMANDS[command][0]
    run = Run(command, cfg, run_args, out, quiet)
    ns = argparse.Namespace(threads=run_args.get("threads") or 1, t_star=run_args.get("t_star"))
    return fn(run, ns)


def reproduce(manifest_path: str, quiet: bool, threads: int | None) -> int:
    man = RunManifest.read(manifest_path)
    if man.subcommand not in COMMANDS:
        raise UsageError(f"manifest names unknown subcommand {man.subcommand!r}")
    cfg = config_from_dict(man.config_echo)
    run_args = dict(man.args)
    if threads:
        run_args["threads"] = threads
    tmp = Path(tempfile.mkdtemp(prefix="kdvbbm-reproduce-"))
    try:
        execute(man.subcommand, cfg, run_args, tmp, quiet=True)
        ok = True
        for entry in man.outputs:
            p = tmp / entry["path"]
            got = sha256_file(p) if p.is_file() else "<missing>"
            same = got == entry["sha256"]
            ok &= same
            if not quiet:
                print(f"[{'PASS' if same else 'FAIL'}] {entry['path']}")
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    if not quiet:
        print(f"{len(man.outputs)} outputs {'reproduced' if ok else 'differ'}")
    return EXIT_PASS if ok else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_PASS
    logging.basicConfig(level=logging.WARNING if a.quiet else logging.INFO, format="%(message)s")
    try:
        if a.command == "reproduce":
            return reproduce(a.manifest, a.quiet, a.threads if a.threads != 1 else None)
        if a.threads < 1:
            raise UsageError("--threads must be >= 1")
        cfg = _load_config(a)
        out = Path(a.out or Path("runs") / a.command)
        return execute(a.command, cfg, _run_args(a), out, a.quiet)
    except (ConfigError, UsageError, FileNotFoundError) as exc:
        print(f"kdvbbm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
