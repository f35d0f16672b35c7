"""Command-line interface.

Subcommands:

* ``tune``        print step scales from the tuning rules
* ``simulate``    run a chain / moment ODE / particle system / AR(1) limit
* ``experiment``  square-bias sweeps and the robustness surface
* ``validate``    run the coefficient identity and Monte Carlo oracle checks

Every writing subcommand creates ``--out`` if needed and drops a
``manifest.json`` with the fully resolved configuration and seed, enough to
re-run bit-identically.  Exit codes: 0 success, 1 validation failure,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from . import chains, experiments, limits, targets, tuning
from .coefficients import f_rate, g_drift, gamma, j_curve
from .errors import DomainError

_EXIT_OK = 0
_EXIT_VALIDATION = 1
_EXIT_USAGE = 2


def _write_manifest(outdir, command, config, seed, outputs):
    manifest = {
        "tool": "mhscaling",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "outputs": sorted(os.path.basename(p) for p in outputs),
        "wall_clock": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    path = os.path.join(outdir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _parse_grid(spec: str):
    lo, hi, num = spec.split(":")
    return np.linspace(float(lo), float(hi), int(num))


# -- tune ----------------------------------------------------------------------


def _cmd_tune(args) -> int:
    rows = []
    if args.a is not None or args.b is not None:
        if args.a is None or args.b is None:
            raise DomainError("--a and --b must be given together")
        if args.mode == "star":
            res = tuning.ell_star_ab(args.a, args.b)
        elif args.mode == "alpha":
            res = tuning.ell_alpha_ab(args.a, args.b, args.alpha)
        else:
            raise DomainError("--mode ent works on --m/--s, not --a/--b")
        rows.append((f"a={args.a:g} b={args.b:g}", res))
    else:
        s_values = _parse_grid(args.s_grid) if args.s_grid else [args.s]
        for s in s_values:
            s = float(s)
            if args.mode == "star":
                res = tuning.ell_star(s)
            elif args.mode == "alpha":
                res = tuning.ell_alpha(s, args.alpha)
            else:
                res = tuning.ell_ent_gaussian(args.m, s)
            rows.append((f"s={s:g}", res))

    print(f"{'input':<20} {'ell':>16} {'objective':>16} {'converged':>10}")
    lines = []
    for label, res in rows:
        print(f"{label:<20} {res.ell:>16.10f} {res.objective_value:>16.10f} {res.converged!s:>10}")
        lines.append((label, res))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "tune.csv")
        with open(path, "w") as fh:
            fh.write("input,ell,objective,converged\n")
            for label, res in lines:
                fh.write(f"{label},{res.ell!r},{res.objective_value!r},{res.converged}\n")
        _write_manifest(
            args.out, "tune",
            {"mode": args.mode, "s": args.s, "s_grid": args.s_grid,
             "a": args.a, "b": args.b, "alpha": args.alpha, "m": args.m},
            None, [path],
        )
    return _EXIT_OK


# -- simulate ------------------------------------------------------------------


def _parse_init(text: str, n: int, p, rng):
    kind, _, arg = text.partition(":")
    if kind == "point":
        return np.full(n, float(arg or 0.0))
    if kind == "gaussian":
        mean, var = (float(v) for v in arg.split(",")) if arg else (0.0, 1.0)
        return mean + math.sqrt(var) * rng.standard_normal(n)
    if kind == "stationary":
        return targets.sample_stationary(p, n, rng)
    raise DomainError(f"unknown init {text!r}; use point:v, gaussian:m,v or stationary")


def _cmd_simulate(args) -> int:
    p = targets.potential_by_name(args.target)
    outputs = []
    config = {k: getattr(args, k) for k in
              ("kind", "target", "n", "steps", "strategy", "ell", "sigma",
               "dt", "t_max", "m0", "s0", "init", "record_every", "y0")}

    if args.kind in ("rwm", "mala"):
        rng = chains.chain_rng(args.seed)
        init = _parse_init(args.init, args.n, p, rng)
        if args.kind == "rwm":
            strategy = chains.strategy_from_label(args.strategy)
            records, _ = chains.run_chain(
                init, p, strategy, steps=args.steps,
                record_every=args.record_every, rng=rng,
            )
        else:
            records, _ = chains.run_mala(
                init, p, args.sigma, steps=args.steps,
                record_every=args.record_every, rng=rng,
            )
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "trajectory.csv")
        chains.write_trajectory_csv(records, path)
        outputs.append(path)

    elif args.kind == "ode":
        strategy = chains.strategy_from_label(args.strategy)
        traj = limits.integrate_gaussian_ode(
            args.m0, args.s0, strategy, dt=args.dt, t_max=args.t_max,
            stop_tol=args.stop_tol,
        )
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "limit.csv")
        limits.write_limit_csv(traj, path)
        outputs.append(path)

    elif args.kind == "particles":
        rng = chains.chain_rng(args.seed)
        init = _parse_init(args.init, args.n, p, rng)
        pe = limits.make_ensemble(init, dt=args.dt, rng=rng)
        ts, ms, ss = limits.integrate_particles(
            pe, p, args.ell, t_max=args.t_max, record_every=args.record_every
        )
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "particles.csv")
        with open(path, "w") as fh:
            fh.write("t,m,s\n")
            for t, m, s in zip(ts, ms, ss):
                fh.write(f"{float(t)!r},{float(m)!r},{float(s)!r}\n")
        outputs.append(path)

    elif args.kind == "ar1":
        traj = limits.mala_ar1_limit(args.ell, args.steps, y0=args.y0, seed=args.seed)
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "ar1.csv")
        with open(path, "w") as fh:
            fh.write("k,y\n")
            for k, y in enumerate(traj):
                fh.write(f"{k},{float(y)!r}\n")
        outputs.append(path)

    else:
        raise DomainError(f"unknown kind {args.kind!r}")

    _write_manifest(args.out, "simulate", config, args.seed, outputs)
    return _EXIT_OK


# -- experiment ----------------------------------------------------------------


def _parse_strategy(text: str) -> chains.Strategy:
    # accept CLI specs (constant:2.38) and manifest labels (constant-2.38)
    try:
        return chains.strategy_from_label(text)
    except DomainError:
        return chains.strategy_from_label(_strategy_spec_from_label(text))


def _config_from_dict(d) -> experiments.ExperimentConfig:
    return experiments.ExperimentConfig(
        target=d["target"],
        n=int(d["n"]),
        window=int(d["window"]),
        t0_grid=tuple(int(v) for v in d["t0_grid"]),
        replicates=int(d["replicates"]),
        strategies=tuple(_parse_strategy(s) for s in d["strategies"]),
        init_kind=d.get("init_kind", "point"),
        init_params=tuple(d.get("init_params", (10.0,))),
        seed=int(d.get("seed", 0)),
    )


def _strategy_spec_from_label(label: str) -> str:
    # manifest labels round-trip through strategy_from_label specs
    if label.startswith("constant-"):
        return "constant:" + label.removeprefix("constant-")
    if label.startswith("acc-") and label.endswith("-numeric"):
        return "alpha:" + label[len("acc-"):-len("-numeric")]
    if label.startswith("acc-") and label.endswith("-adaptive"):
        return "alpha-adaptive:" + label[len("acc-"):-len("-adaptive")]
    if label == "rate-optimal":
        return "star"
    if label == "entropy-gaussian":
        return "ent"
    return label


def _cmd_experiment(args) -> int:
    if args.kind == "loss":
        b_values, a_grid, alphas = experiments.robustness_grid()
        rows = experiments.relative_loss_surface(b_values, a_grid, alphas)
        means = experiments.mean_relative_loss(rows)
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "relative_loss.csv")
        with open(path, "w") as fh:
            fh.write("alpha,b,a,loss\n")
            for r in rows:
                fh.write(f"{r.alpha!r},{r.b!r},{r.a!r},{r.loss!r}\n")
        _write_manifest(
            args.out, "experiment",
            {"kind": "loss", "a_grid": "linear:0.01:100:61",
             "b_values": list(b_values), "alphas": list(alphas)},
            None, [path],
        )
        for alpha in sorted(means):
            print(f"alpha={alpha:g}: mean relative loss {means[alpha]:.5f}")
        return _EXIT_OK

    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        cfg = _config_from_dict(raw.get("config", raw) if isinstance(raw, dict) else raw)
    elif args.preset == "desk":
        cfg = experiments.desk_config(target=args.target, seed=args.seed)
    elif args.preset == "paper":
        cfg = experiments.paper_config(target=args.target, seed=args.seed)
    else:
        raise DomainError("give --preset desk|paper or --config FILE")

    curves = experiments.square_bias_sweep(cfg, workers=args.threads)
    paths = experiments.write_bias_outputs(cfg, curves, args.out)
    print(f"wrote {len(paths)} files to {args.out}")
    return _EXIT_OK


# -- validate ------------------------------------------------------------------


def _cmd_validate(args) -> int:
    checks = []

    def check(name, ok, detail=""):
        checks.append(ok)
        print(f"{'PASS' if ok else 'FAIL'}  {name}{': ' + detail if detail else ''}")

    grid_c = np.linspace(0.05, 10.0, 20)
    grid_l = np.linspace(0.3, 4.5, 20)
    worst = max(
        abs(gamma(float(c), float(c), float(l)) - 2.0 * g_drift(float(c), float(c), float(l)))
        for c in grid_c for l in grid_l
    )
    check("equilibrium identity gamma == 2*g_drift", worst <= 1e-12, f"max |diff| {worst:.2e}")

    rng = np.random.default_rng(args.seed)
    ok = True
    for _ in range(1000):
        a = float(rng.uniform(0.0, 10.0))
        b = float(rng.uniform(-5.0, 5.0))
        ell = float(rng.uniform(0.05, 5.0))
        if abs(a - b) < 1e-9:
            continue
        diff = gamma(a, b, ell) - 2.0 * g_drift(a, b, ell)
        if math.copysign(1.0, diff) != math.copysign(1.0, a - b):
            ok = False
            break
    check("sign identity sign(gamma - 2 g_drift) == sign(a - b)", ok)

    min_f = min(
        f_rate(float(a), float(b), float(l))
        for a in np.linspace(0.0, 10.0, 11)
        for b in np.linspace(-10.0, 10.0, 11)
        for l in (0.5, 1.0, 2.0, 4.0)
    )
    check("entropy rate positive on compacts", min_f > 0.0, f"min {min_f:.3e}")

    n_samples = int(args.samples)
    ok = True
    detail = ""
    for _ in range(8):
        a = float(rng.uniform(0.05, 8.0))
        b = float(rng.uniform(-3.0, 3.0))
        ell = float(rng.uniform(0.2, 3.0))
        z = rng.normal(-0.5 * ell * ell * b, ell * math.sqrt(a), size=n_samples)
        capped = np.exp(np.minimum(z, 0.0))
        drift = np.where(z < 0.0, capped, 0.0)
        se_g = ell * ell * capped.std() / math.sqrt(n_samples)
        se_d = ell * ell * drift.std() / math.sqrt(n_samples)
        err_g = abs(gamma(a, b, ell) - ell * ell * capped.mean())
        err_d = abs(g_drift(a, b, ell) - ell * ell * drift.mean())
        if err_g > 4.0 * se_g or err_d > 4.0 * se_d:
            ok = False
            detail = f"(a={a:.3f}, b={b:.3f}, ell={ell:.3f})"
            break
    check(f"Monte Carlo oracle at {n_samples} samples (4 se)", ok, detail)

    res = tuning.ell_star(0.0)
    check("rate-optimal scale at s=0 is sqrt(2)",
          abs(res.ell - math.sqrt(2.0)) <= 1e-8, f"{res.ell:.12f}")
    res = tuning.ell_star(1.0)
    check("rate-optimal scale at s=1", abs(res.ell - 1.85) <= 0.01, f"{res.ell:.6f}")
    res = tuning.ell_alpha(1.0, 0.234)
    check("acceptance-matched scale at (1, 0.234)",
          abs(res.ell - 2.38) <= 0.01, f"{res.ell:.6f}")
    matched = {r: tuning.matched_alpha(r)
               for r in ("near_equilibrium", "s_to_zero", "s_to_infinity")}
    check(
        "matched acceptance targets",
        abs(matched["near_equilibrium"] - 0.35) <= 0.005
        and abs(matched["s_to_zero"] - math.exp(-1.0)) <= 1e-10
        and abs(matched["s_to_infinity"] - 0.27) <= 0.005,
        ", ".join(f"{k}={v:.4f}" for k, v in matched.items()),
    )

    ok = True
    for _ in range(10):
        s = float(rng.uniform(0.01, 30.0))
        alpha = float(rng.uniform(0.05, 0.9))
        if abs(j_curve(s, tuning.ell_alpha(s, alpha).ell) - alpha) > 1e-10:
            ok = False
            break
    check("acceptance matching residuals < 1e-10", ok)

    ok = True
    for _ in range(10):
        a = float(rng.uniform(0.0, 5.0))
        b = float(rng.uniform(0.1, 4.0))
        lam = float(rng.uniform(0.2, 5.0))
        got = tuning.ell_star_ab(lam * a, lam * b).ell
        want = tuning.ell_star_ab(a, b).ell / math.sqrt(lam)
        if abs(got - want) > 1e-8 * max(1.0, want):
            ok = False
            break
    check("rate-optimal scaling law", ok)

    failed = checks.count(False)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return _EXIT_OK if failed == 0 else _EXIT_VALIDATION


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mhscaling",
        description="Proposal-scale tuning and mean-field limits for "
        "Metropolis algorithms in the transient phase",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = {"formatter_class": argparse.ArgumentDefaultsHelpFormatter}

    p_tune = sub.add_parser("tune", help="step-scale tuning rules", **fmt)
    p_tune.add_argument("--mode", choices=("star", "alpha", "ent"), required=True,
                        help="rule: rate-optimal, acceptance-matched, or entropy-derivative")
    p_tune.add_argument("--s", type=float, default=1.0, help="moment ratio a/b (default 1)")
    p_tune.add_argument("--s-grid", help="grid lo:hi:num instead of --s")
    p_tune.add_argument("--a", type=float, help="moment E[(V')^2]")
    p_tune.add_argument("--b", type=float, help="moment E[V'']")
    p_tune.add_argument("--alpha", type=float, default=0.27,
                        help="target acceptance rate for --mode alpha (default 0.27)")
    p_tune.add_argument("--m", type=float, default=0.0,
                        help="mean for --mode ent (default 0)")
    p_tune.add_argument("--out", help="directory for tune.csv + manifest")
    p_tune.set_defaults(fn=_cmd_tune)

    p_sim = sub.add_parser("simulate", help="chains, moment ODE, particles, AR(1)", **fmt)
    p_sim.add_argument("--kind", choices=("rwm", "mala", "ode", "particles", "ar1"),
                       required=True, help="what to simulate")
    p_sim.add_argument("--target", choices=("gaussian", "double-well"),
                       default="gaussian", help="target potential")
    p_sim.add_argument("--n", type=int, default=100, help="dimension / particle count")
    p_sim.add_argument("--steps", type=int, default=10000, help="chain steps")
    p_sim.add_argument("--strategy", default="constant:2.38",
                       help="constant[:ell] | alpha[:a] | alpha-adaptive[:a] | star | ent")
    p_sim.add_argument("--ell", type=float, default=1.0,
                       help="fixed step constant (particles, ar1)")
    p_sim.add_argument("--sigma", type=float, default=0.1, help="MALA proposal std")
    p_sim.add_argument("--dt", type=float, default=1e-3, help="integrator step")
    p_sim.add_argument("--t-max", type=float, default=10.0, help="integration horizon")
    p_sim.add_argument("--stop-tol", type=float, default=None,
                       help="early stop for the ODE once |m|,|s-1| drop below")
    p_sim.add_argument("--m0", type=float, default=10.0, help="ODE initial mean")
    p_sim.add_argument("--s0", type=float, default=100.0, help="ODE initial second moment")
    p_sim.add_argument("--y0", type=float, default=0.0, help="AR(1) start")
    p_sim.add_argument("--init", default="gaussian:0,1",
                       help="point:v | gaussian:mean,var | stationary")
    p_sim.add_argument("--record-every", type=int, default=1, help="recording cadence")
    p_sim.add_argument("--seed", type=int, default=0, help="master seed")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.set_defaults(fn=_cmd_simulate)

    p_exp = sub.add_parser("experiment", help="square-bias sweeps / robustness surface", **fmt)
    p_exp.add_argument("--kind", choices=("bias", "loss"), default="bias",
                       help="square-bias sweep or relative-loss surface")
    p_exp.add_argument("--preset", choices=("desk", "paper"), help="built-in config")
    p_exp.add_argument("--config", help="JSON config or manifest to re-run")
    p_exp.add_argument("--target", choices=("gaussian", "double-well"),
                       default="gaussian", help="target potential for presets")
    p_exp.add_argument("--seed", type=int, default=0, help="master seed for presets")
    p_exp.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: up to 8)")
    p_exp.add_argument("--out", required=True, help="output directory")
    p_exp.set_defaults(fn=_cmd_experiment)

    p_val = sub.add_parser("validate", help="identity and oracle checks", **fmt)
    p_val.add_argument("--samples", type=float, default=1e6,
                       help="Monte Carlo oracle sample count (default 1e6)")
    p_val.add_argument("--seed", type=int, default=0, help="master seed")
    p_val.set_defaults(fn=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
