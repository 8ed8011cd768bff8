"""Command-line interface: ``localep <subcommand> [flags]``.

Every subcommand first resolves its flags into a plain config (defaults
filled in) and echoes it as JSON on stderr; with ``--dry-run`` it stops
there. Exit codes: 0 success, 1 invalid invocation or config, 2 failure
while computing.

A ``--seed`` of the form ``fixed-points:0.2,0.3`` replaces the random sample
by the listed points (for ``poisson``: the realized Poisson draws, whose
count need not equal ``--n``). In ``d > 1`` points are separated by ``;`` and
coordinates by ``,`` (``fixed-points:0.1,0.2;0.3,0.4``; a single point
needs a trailing ``;``).
"""

import argparse
import json
import os
import sys

import numpy as np

__all__ = ["main", "build_parser"]

OUTPUT_ENV = "LOCALEP_OUTPUT_DIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# flag parsing helpers
# ---------------------------------------------------------------------------

def parse_seed(text):
    """Integer seed, or ``fixed-points:`` followed by literal points."""
    text = str(text).strip()
    if text.startswith("fixed-points:"):
        body = text[len("fixed-points:"):].strip()
        if not body:
            return {"points": []}
        if ";" in body:
            rows = [r for r in body.split(";") if r.strip()]
            pts = [[float(v) for v in r.split(",")] for r in rows]
        else:
            pts = [[float(v)] for v in body.split(",") if v.strip()]
        widths = {len(p) for p in pts}
        if len(widths) > 1:
            raise ValueError("fixed points must all have the same dimension")
        return {"points": pts}
    try:
        seed = int(text)
    except ValueError:
        raise ValueError(f"seed must be an integer or fixed-points:..., got {text!r}") from None
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return {"seed": seed}


def _json_or_kind(text, what):
    text = text.strip()
    if text.startswith("{") or text.startswith("["):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"--{what} is not valid JSON: {exc}") from None
    return {"kind": text}


def _density_spec(text, d):
    spec = _json_or_kind(text, "density")
    if spec == {"kind": "uniform-box"}:
        spec = {"kind": "uniform-box", "low": [0.0] * d, "high": [1.0] * d}
    return spec


def _float_list(values, what):
    try:
        return [float(v) for v in values]
    except ValueError:
        raise ValueError(f"--{what} expects numbers") from None


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="localep", description="Local empirical process laboratory.")
    sub = p.add_subparsers(dest="command", metavar="subcommand", parser_class=_Parser)
    sub.required = True

    def common(sp, sample=True):
        sp.add_argument("--dry-run", action="store_true",
                        help="validate and print the resolved config without computing")
        sp.add_argument("--digits", type=int, default=6, help="significant digits printed")
        if sample:
            sp.add_argument("--n", type=int, required=True, help="sample size")
            sp.add_argument("--h", type=float, required=True, help="bandwidth in (0, 1)")
            sp.add_argument("--seed", default="0",
                            help="integer seed or fixed-points:x1,x2,...")

    sp = sub.add_parser("osc", help="oscillation modulus of the uniform empirical process")
    common(sp)

    for name, text in (("kde", "kernel density estimate at points z"),
                       ("band", "plug-in confidence band on a z-grid")):
        sp = sub.add_parser(name, help=text)
        common(sp)
        sp.add_argument("--z", nargs="+", required=True, help="evaluation points (d=1), or rows 'a,b'")
        sp.add_argument("--kernel", default="epanechnikov")
        sp.add_argument("--density", default="uniform-box", help="kind name or JSON spec")
        sp.add_argument("--out", help="CSV path for the rows")

    sp = sub.add_parser("local", help="local empirical process over a net at z")
    common(sp)
    sp.add_argument("--z", nargs="+", required=True)
    sp.add_argument("--net", default='{"kind": "anchored-intervals", "q": 4}',
                    help="net kind or JSON spec")
    sp.add_argument("--density", default="uniform-box")
    sp.add_argument("--mode", choices=("raw-E", "D", "L"), default="L")

    for name, text in (("dist", "max-norm distance to the limit ball"),
                       ("rate", "rate function I(psi)")):
        sp = sub.add_parser(name, help=text)
        common(sp, sample=False)
        sp.add_argument("--gram", help="JSON matrix")
        sp.add_argument("--net", help="net kind or JSON spec (instead of --gram)")
        sp.add_argument("--psi", nargs="+", required=True)
        sp.add_argument("--tol", type=float, default=1e-6)

    sp = sub.add_parser("poisson", help="one replication of the Poissonized process")
    common(sp)
    sp.add_argument("--z", nargs="+", required=True)
    sp.add_argument("--net", default='{"kind": "anchored-intervals", "q": 4}')
    sp.add_argument("--density", default="uniform-box")
    sp.add_argument("--rep", type=int, default=0)

    sp = sub.add_parser("experiment", help="run a JSON experiment config")
    common(sp, sample=False)
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./results)")
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("validate-schedule", help="check bandwidth conditions H.i-H.iii")
    common(sp, sample=False)
    sp.add_argument("--kind", choices=("power", "custom-table"), default="power")
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--scale", type=float, default=1.0)
    sp.add_argument("--table", nargs="*", default=[], help="pairs n:h for custom-table")
    sp.add_argument("--n", nargs="+", type=int, required=True,
                    help="n_min n_max, or three or more explicit sizes")
    sp.add_argument("--threshold", type=float, default=10.0)
    return p


# ---------------------------------------------------------------------------
# resolution (validation phase) and execution
# ---------------------------------------------------------------------------

def _z_points(values):
    rows = [[float(c) for c in v.split(",")] for v in values]
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError("all --z points need the same dimension")
    return rows


def _resolve(args):
    """Return ``(config, runner)``; raises ValueError for invalid input."""
    from localep import densities, function_classes, local_process, limit_set, poissonization
    cmd = args.command
    cfg = {"command": cmd, "digits": args.digits}
    if hasattr(args, "n") and cmd not in ("validate-schedule",):
        if args.n < 0:
            raise ValueError("--n must be nonnegative")
        if not 0 < args.h < 1:
            raise ValueError("--h must lie in (0, 1)")
        cfg.update(n=args.n, h=args.h, seed=parse_seed(args.seed))
        pts = cfg["seed"].get("points")
        # for poisson the points are the eta draws; n is only the rate
        if pts is not None and cmd != "poisson" and len(pts) != args.n:
            raise ValueError(f"--n {args.n} but {len(pts)} fixed points given")

    def sample_points(density, d):
        seed = cfg["seed"]
        if "points" in seed:
            pts = np.asarray(seed["points"], dtype=float).reshape(-1, d)
            if pts.shape[0] != cfg["n"]:
                raise ValueError(f"--n {cfg['n']} but {pts.shape[0]} fixed points given")
            return pts
        return density.sample(cfg["n"], seed["seed"]).points

    if cmd == "osc":
        cfg["density"] = {"kind": "uniform-box", "low": [0.0], "high": [1.0]}

        def run():
            dens = densities.make_density(cfg["density"])
            pts = sample_points(dens, 1)
            return [local_process.oscillation_modulus(pts[:, 0], cfg["h"])]
        return cfg, run

    if cmd in ("kde", "band"):
        z = _z_points(args.z)
        d = len(z[0])
        cfg.update(z=z, kernel=args.kernel, density=_density_spec(args.density, d), out=args.out)
        dens = densities.make_density(cfg["density"])
        K = function_classes.ProductKernel(args.kernel, d)
        cfg["density"] = dens.to_dict()

        def run():
            pts = sample_points(dens, d)
            if pts.shape[0] == 0:
                raise ValueError("kernel density estimate needs n >= 1")
            if cmd == "kde":
                return list(np.atleast_1d(local_process.kde(pts, K, cfg["h"], np.asarray(z))))
            return local_process.kde_band(pts, K, cfg["h"], np.asarray(z))
        return cfg, run

    if cmd in ("local", "poisson"):
        z = _z_points(args.z)
        if len(z) != 1:
            raise ValueError(f"{cmd} takes a single --z point")
        d = len(z[0])
        net_spec = _json_or_kind(args.net, "net")
        net = function_classes.build_net(net_spec)
        dens = densities.make_density(_density_spec(args.density, d))
        cfg.update(z=z[0], net=net.spec or net_spec, density=dens.to_dict())
        if cmd == "local":
            cfg["mode"] = args.mode

            def run():
                pts = sample_points(dens, d)
                return list(local_process.local_empirical(pts, z[0], cfg["h"], net, dens,
                                                          cfg["mode"]).psi)
            return cfg, run
        cfg["rep"] = args.rep

        def run():
            seed = cfg["seed"]
            if "points" in seed:
                res = poissonization.poisson_statistic(seed["points"], cfg["n"], z[0], cfg["h"],
                                                       net, dens)
            else:
                res = poissonization.poissonized_process(dens, cfg["n"], z[0], cfg["h"], net,
                                                         seed["seed"], cfg["rep"])
            return list(res.psi) + [res.eta]
        return cfg, run

    if cmd in ("dist", "rate"):
        psi = _float_list(args.psi, "psi")
        if (args.gram is None) == (args.net is None):
            raise ValueError("give exactly one of --gram and --net")
        if args.gram is not None:
            gram = np.asarray(json.loads(args.gram), dtype=float)
            cfg["gram"] = gram.tolist()
        else:
            spec = _json_or_kind(args.net, "net")
            net = function_classes.build_net(spec)
            gram = net.gram
            cfg["net"] = net.spec or spec
        gram = np.atleast_2d(gram)
        if gram.shape != (len(psi), len(psi)):
            raise ValueError(f"gram is {gram.shape}, psi has length {len(psi)}")
        cfg.update(psi=psi, tol=args.tol)

        def run():
            model = limit_set.LimitBallModel(solver_tol=cfg["tol"]).fit(gram)
            if cmd == "dist":
                return [model.distance(np.asarray(psi))]
            return [float(model.rate(np.asarray(psi)))]
        return cfg, run

    if cmd == "validate-schedule":
        table = {}
        for item in args.table:
            try:
                n, h = item.split(":")
                table[int(n)] = float(h)
            except ValueError:
                raise ValueError(f"--table entries look like n:h, got {item!r}") from None
        if args.kind == "custom-table" and not table:
            raise ValueError("custom-table schedules need --table")
        sched = local_process.BandwidthSchedule(args.kind, args.alpha, args.scale, table)
        cfg.update(schedule=sched.to_dict(), n=args.n, threshold=args.threshold)

        def run():
            return local_process.validate_schedule(sched, args.n, args.threshold)
        return cfg, run

    if cmd == "experiment":
        from localep import experiments
        exp = experiments.load_config(args.config)
        out = args.out or os.environ.get(OUTPUT_ENV) or "results"
        if args.workers < 1:
            raise ValueError("--workers must be at least 1")
        cfg.update(config=exp.to_dict(), out=out, workers=args.workers,
                   cells=len(exp.cells()),
                   schedule_report=exp.schedule_report.summary())

        def run():
            rows = experiments.run_experiment(exp, args.workers)
            return experiments.emit(rows, out, exp)
        return cfg, run

    raise ValueError(f"unknown subcommand {cmd!r}")


def _fmt(v, digits):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.{digits}g}"


def _report(cmd, cfg, result, out=None):
    out = sys.stdout if out is None else out
    digits = cfg["digits"]
    if cmd == "validate-schedule":
        print(result.summary(), file=out)
        return 0 if result.ok else 1
    if cmd == "experiment":
        print(str(result), file=out)
        return 0
    if cmd == "band":
        lines = ["z,f_n,halfwidth"]
        for z, f, w in result:
            zs = ";".join(_fmt(c, digits) for c in np.atleast_1d(z))
            lines.append(f"{zs},{_fmt(f, digits)},{_fmt(w, digits)}")
        text = "\n".join(lines) + "\n"
        if cfg.get("out"):
            with open(cfg["out"], "w") as fh:
                fh.write(text)
        print(text, end="", file=out)
        return 0
    print(" ".join(_fmt(v, digits) for v in result), file=out)
    return 0


def _origin(exc):
    """Innermost package module on the traceback, for error context."""
    module = "localep"
    tb = exc.__traceback__
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("localep"):
            module = name
        tb = tb.tb_next
    return module


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        cfg, run = _resolve(args)
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"localep {args.command}: invalid input: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(cfg, sort_keys=True, default=str), file=sys.stderr)
    if args.dry_run:
        print("dry run: configuration valid, nothing computed", file=sys.stderr)
        return 0
    try:
        result = run()
        return _report(args.command, cfg, result)
    except Exception as exc:
        module = _origin(exc)
        print(f"localep {args.command}: {type(exc).__name__} ({module}): {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
