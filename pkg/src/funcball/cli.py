"""Command-line experiment runner.

Every subcommand writes one CSV file (fixed per-command header, floats at
17 significant digits) and prints a single JSON line to stdout that embeds
the fully resolved configuration.  Seeded single-threaded runs are
byte-reproducible.  Exit codes: 0 success, 2 configuration error,
3 accuracy error (best-effort estimate included in the JSON).

Options may come from a flat ``key=value`` config file ('#' comments, one
key per line, keys = long flag names); explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import averages as avg
from . import densities, expr, kernels, mclab
from .ball import PExponent, ball
from .exceptions import AccuracyError, ConfigurationError, DomainError, FuncballError
from .quadrature import DEFAULT_SETTINGS, QuadratureSettings
from .sampler import SeedSpec, sample_ball_batch

FLOAT_FORMAT = "%.17g"


def fmt(x) -> str:
    if isinstance(x, float):
        return FLOAT_FORMAT % x
    return str(x)


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def emit(command, config, csv_path, **summary):
    record = {"command": command, "csv": csv_path, "config": config}
    record.update(summary)
    print(json.dumps(record, sort_keys=True))


# ------------------------------------------------------------ option parsing


def read_config_file(path):
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def parse_int_list(text):
    try:
        return [int(part) for part in str(text).split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"expected comma-separated integers, got {text!r}") from exc


def parse_float_list(text):
    try:
        return [float(part) for part in str(text).split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"expected comma-separated reals, got {text!r}") from exc


def parse_interval(text):
    parts = parse_float_list(text)
    if len(parts) != 2:
        raise ConfigurationError(f"an interval needs two endpoints, got {text!r}")
    return (parts[0], parts[1])


def parse_blocks(text):
    blocks = []
    for chunk in str(text).split(";"):
        chunk = chunk.strip().strip("()")
        if not chunk:
            continue
        parts = parse_float_list(chunk)
        if len(parts) != 2:
            raise ConfigurationError(f"each block needs (s, r), got {chunk!r}")
        blocks.append((parts[0], parts[1]))
    if not blocks:
        raise ConfigurationError(f"no blocks found in {text!r}")
    return avg.BlockScheme(tuple(blocks))


def compile_expression(source, var_names, growth_override=None):
    """Parse, certify growth, and compile to a vectorized callable."""
    tree = expr.parse(source, var_names)
    certificate = expr.growth_certificate(tree)
    if certificate is expr.UNBOUNDED:
        if growth_override is None:
            raise ConfigurationError(
                f"no polynomial growth bound derivable for {source!r}; pass --growth C,k"
            )
        certificate = expr.GrowthBound(*growth_override)
    return expr.compile_array(tree, var_names), certificate


class Options:
    """Merged view of flags (winning) over config-file values over defaults."""

    def __init__(self, args, file_values):
        self.args = vars(args)
        self.file = file_values

    def get(self, key, default=None, cast=None):
        value = self.args.get(key)
        if value is None:
            value = self.file.get(key)
        if value is None:
            return default
        return cast(value) if cast else value

    def require(self, key, cast=None):
        value = self.get(key, cast=cast)
        if value is None:
            raise ConfigurationError(f"missing required option --{key.replace('_', '-')}")
        return value


def resolved_ball(opts) -> "densities.BallSpec":
    p = opts.require("p", cast=str)
    R = opts.get("R", 1.0, float)
    quadrant = opts.get("quadrant", None, str)
    return ball(p, R, quadrant)


def resolved_settings(opts) -> QuadratureSettings:
    abs_tol = opts.get("abs_tol", DEFAULT_SETTINGS.abs_tol, float)
    rel_tol = opts.get("rel_tol", DEFAULT_SETTINGS.rel_tol, float)
    max_subdivisions = opts.get("max_subdivisions", DEFAULT_SETTINGS.max_subdivisions, int)
    return QuadratureSettings(
        abs_tol=abs_tol, rel_tol=rel_tol, max_subdivisions=max_subdivisions
    )


def out_path(opts, command) -> str:
    explicit = opts.get("out")
    if explicit:
        return explicit
    outdir = os.environ.get("FUNCBALL_OUTDIR", ".")
    return os.path.join(outdir, f"{command}.csv")


def base_config(opts, spec, seed=None, **extra):
    config = {
        "p": str(spec.p),
        "R": spec.R,
        "quadrant": str(spec.quadrant),
        "backend": kernels.backend_name(),
    }
    if seed is not None:
        config["seed"] = seed.root_seed
        config["stream"] = seed.stream_index
    config.update({k: v for k, v in extra.items() if v is not None})
    return config


# ---------------------------------------------------------------- subcommands


def cmd_density(opts):
    spec = resolved_ball(opts)
    x_min = opts.get("x_min", -4.0 if spec.is_full else 0.0, float)
    x_max = opts.get("x_max", 4.0, float)
    points = opts.get("points", 101, int)
    n_list = parse_int_list(opts.get("n", "")) if opts.get("n") else []
    grid = np.linspace(x_min, x_max, points)
    header = ["x", "rho_limit"] + [f"rho_n_{n}" for n in n_list]
    limit = densities.coordinate_density_limit(grid, spec)
    columns = [densities.coordinate_density_finite(grid, n, spec) for n in n_list]
    rows = [
        [grid[i], float(limit[i])] + [float(col[i]) for col in columns]
        for i in range(points)
    ]
    path = out_path(opts, "density")
    write_csv(path, header, rows)
    config = base_config(
        opts, spec, x_min=x_min, x_max=x_max, points=points, n=",".join(map(str, n_list))
    )
    emit("density", config, path, rows=points)
    return 0


def cmd_sample(opts):
    spec = resolved_ball(opts)
    n = opts.require("n", int)
    count = opts.get("count", 100, int)
    seed = SeedSpec(opts.get("seed", 0, int))
    rng = seed.generator(0)
    points = sample_ball_batch(n, spec, rng, count)
    header = ["sample"] + [f"x{k}" for k in range(1, n + 1)]
    rows = [[i] + [float(v) for v in row] for i, row in enumerate(points)]
    path = out_path(opts, "sample")
    write_csv(path, header, rows)
    config = base_config(opts, spec, seed, n=n, count=count)
    emit("sample", config, path, count=count)
    return 0


def _average_mode(opts):
    modes = [
        name
        for name, key in (
            ("blocks", "blocks"),
            ("annulus", "annulus_r"),
            ("sweep", "sweep_R"),
            ("timeweight", "a"),
            ("multi", "intervals"),
        )
        if opts.get(key) is not None
    ]
    if len(modes) > 1:
        raise ConfigurationError(f"conflicting average modes: {modes}")
    return modes[0] if modes else "single"


def cmd_average(opts):
    spec = resolved_ball(opts)
    settings = resolved_settings(opts)
    mode = _average_mode(opts)
    growth_override = opts.get("growth")
    if growth_override is not None:
        growth_override = tuple(parse_float_list(growth_override))
    g_source = opts.require("g", str)
    path = out_path(opts, "average")
    config = base_config(opts, spec, g=g_source, mode=mode)

    if mode == "multi":
        intervals = [parse_interval(part) for part in opts.require("intervals", str).split(";")]
        m = len(intervals)
        var_names = [f"x{j}" for j in range(1, m + 1)]
        g, growth = compile_expression(g_source, var_names, growth_override)
        value = avg.average_multivariate(g, intervals, spec, settings, growth)
        config["intervals"] = opts.get("intervals")
        write_csv(path, ["quantity", "value"], [["EY", value]])
        emit("average", config, path, value=value)
        return 0

    g, growth = compile_expression(g_source, ["x"], growth_override)

    if mode == "single":
        interval = opts.get("interval")
        if interval is not None:
            interval = parse_interval(interval)
            value = avg.average_subinterval(g, interval, spec, settings, growth)
            config["interval"] = opts.get("interval")
        else:
            value = avg.average_single(g, spec, settings, growth)
        write_csv(path, ["quantity", "value"], [["EY", value]])
        emit("average", config, path, value=value)
    elif mode == "blocks":
        scheme = parse_blocks(opts.require("blocks", str))
        value = avg.average_blocks(g, scheme, spec, settings, growth)
        uniform = avg.average_single(g, spec, settings, growth)
        config["blocks"] = opts.get("blocks")
        write_csv(
            path,
            ["quantity", "value"],
            [["EY_blocks", value], ["EY_uniform", uniform]],
        )
        emit("average", config, path, value=value, uniform=uniform)
    elif mode == "annulus":
        r = float(opts.require("annulus_r", float))
        ratio_n = opts.get("ratio_n", None, int)
        result = avg.annulus_average(g, r, spec, ratio_n, settings, growth)
        config.update(annulus_r=r, ratio_n=ratio_n)
        rows = [["EY", result.average]]
        if result.volume_ratio is not None:
            rows.append(["volume_ratio", result.volume_ratio])
        write_csv(path, ["quantity", "value"], rows)
        emit("average", config, path, value=result.average, volume_ratio=result.volume_ratio)
    elif mode == "timeweight":
        a_source = opts.require("a", str)
        a_tree = expr.parse(a_source, ["t"])
        a = lambda t: expr.evaluate(a_tree, {"t": t})  # noqa: E731
        value = avg.average_time_weighted(a, g, spec, 1, settings, growth)
        config["a"] = a_source
        write_csv(path, ["quantity", "value"], [["EY", value]])
        emit("average", config, path, value=value)
    else:  # sweep
        grid = parse_float_list(opts.require("sweep_R", str))
        result = avg.whole_space_sweep(g, spec, grid, settings, growth)
        config["sweep_R"] = opts.get("sweep_R")
        write_csv(path, ["R", "value"], [[R, v] for R, v in result.entries])
        emit("average", config, path, flag=result.flag, last=result.entries[-1][1])
    return 0


def _seeded(opts):
    return SeedSpec(opts.get("seed", 0, int), opts.get("stream", 0, int))


def cmd_mc(opts):
    spec = resolved_ball(opts)
    seed = _seeded(opts)
    n = opts.require("n", int)
    samples = opts.get("samples", 10000, int)
    threads = opts.get("threads", 1, int)
    g_source = opts.require("g", str)
    growth_override = opts.get("growth")
    if growth_override is not None:
        growth_override = tuple(parse_float_list(growth_override))
    g, growth = compile_expression(g_source, ["x"], growth_override)
    interval = opts.get("interval")
    intervals = (parse_interval(interval),) if interval else (avg.FULL_INTERVAL,)
    functional = avg.FunctionalSpec(g=g, m=1, intervals=intervals, growth=growth)
    blocks = opts.get("blocks")
    if blocks is not None:
        scheme = parse_blocks(blocks)
        est = mclab.mc_block_scheme(functional, scheme, n, spec, samples, seed, threads)
        mode = "blocks"
    else:
        est = mclab.mc_functional_average(functional, n, spec, samples, seed, threads)
        mode = "plain"
    path = out_path(opts, "mc")
    write_csv(
        path,
        ["n", "mean", "var_Yn", "stderr", "samples"],
        [[est.n, est.mean, est.variance, est.stderr, est.samples]],
    )
    config = base_config(
        opts, spec, seed, g=g_source, n=n, samples=samples, mode=mode,
        blocks=blocks, interval=interval, threads=threads,
    )
    emit("mc", config, path, mean=est.mean, stderr=est.stderr)
    return 0


def cmd_converge(opts):
    spec = resolved_ball(opts)
    settings = resolved_settings(opts)
    seed = _seeded(opts)
    n_list = parse_int_list(opts.require("n", str))
    samples = opts.get("samples", 10000, int)
    threads = opts.get("threads", 1, int)
    g_source = opts.require("g", str)
    g, growth = compile_expression(g_source, ["x"], opts.get("growth"))
    functional = avg.FunctionalSpec.univariate(g, growth=growth)
    record = mclab.mc_variance_decay(functional, n_list, spec, samples, seed, threads, settings)
    rows = [
        [n, est.mean, est.variance, est.stderr, record.target, abs(est.mean - record.target)]
        for n, est in record.entries
    ]
    path = out_path(opts, "converge")
    write_csv(path, ["n", "mean", "var_Yn", "stderr", "closed_form", "gap"], rows)
    config = base_config(
        opts, spec, seed, g=g_source, n=opts.get("n"), samples=samples, threads=threads
    )
    emit(
        "converge",
        config,
        path,
        closed_form=record.target,
        decay_exponent=record.decay_exponent,
    )
    return 0


def cmd_exchange(opts):
    spec = resolved_ball(opts)
    settings = resolved_settings(opts)
    seed = _seeded(opts)
    n_list = parse_int_list(opts.require("n", str))
    samples = opts.get("samples", 10000, int)
    threads = opts.get("threads", 1, int)
    g, growth = compile_expression(opts.require("g", str), ["x"], opts.get("growth"))
    h_source = opts.require("h", str)
    h_tree = expr.parse(h_source, ["x"])
    h = expr.compile_array(h_tree, ["x"])
    functional = avg.FunctionalSpec.univariate(g, growth=growth)
    rows = mclab.mc_exchange_gap(h, functional, n_list, spec, samples, seed, threads, settings)
    path = out_path(opts, "exchange")
    write_csv(
        path,
        ["n", "h_mean", "gap", "stderr"],
        [[row.n, row.h_mean, row.gap, row.stderr] for row in rows],
    )
    config = base_config(
        opts, spec, seed, g=opts.get("g"), h=h_source, n=opts.get("n"),
        samples=samples, threads=threads,
    )
    emit("exchange", config, path, final_gap=rows[-1].gap)
    return 0


def cmd_kernel(opts):
    p = PExponent.parse(opts.require("p", str))
    settings = resolved_settings(opts)
    n_list = parse_int_list(opts.require("n", str))
    n0 = opts.get("n0", 0, int)
    f_source = opts.get("f", "1")
    f, growth = compile_expression(f_source, ["x"], opts.get("growth"))
    rows = mclab.kernel_limit_report(f, p, n0, n_list, settings, growth)
    path = out_path(opts, "kernel")
    write_csv(
        path,
        ["n", "kernel_value", "limit_value", "gap"],
        [[r.n, r.kernel_value, r.limit_value, r.gap] for r in rows],
    )
    config = {
        "p": str(p),
        "n0": n0,
        "f": f_source,
        "n": opts.get("n"),
        "backend": kernels.backend_name(),
    }
    emit("kernel", config, path, limit=rows[0].limit_value)
    return 0


COMMANDS = {
    "density": cmd_density,
    "sample": cmd_sample,
    "average": cmd_average,
    "mc": cmd_mc,
    "converge": cmd_converge,
    "exchange": cmd_exchange,
    "kernel": cmd_kernel,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="funcball",
        description="Averages of integral functionals on lp balls of C[0,1]: "
        "closed forms and Monte Carlo experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, *specs):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key=value config file; flags override")
        p.add_argument("--out", help="CSV output path (default $FUNCBALL_OUTDIR/<cmd>.csv)")
        for flags, kwargs in specs:
            p.add_argument(*flags, **kwargs)
        return p

    common_ball = [
        (("--p",), dict(help='norm exponent, "p0/q0" or decimal')),
        (("--R",), dict(type=float, help="ball radius (default 1)")),
        (("--quadrant",), dict(choices=["full", "positive"], help="default: widest admissible")),
    ]
    common_tol = [
        (("--abs-tol",), dict(type=float, dest="abs_tol")),
        (("--rel-tol",), dict(type=float, dest="rel_tol")),
        (("--max-subdivisions",), dict(type=int, dest="max_subdivisions")),
    ]
    common_mc = [
        (("--seed",), dict(type=int, help="root seed (default 0)")),
        (("--stream",), dict(type=int, help="stream index (default 0)")),
        (("--samples",), dict(type=int, help="Monte Carlo sample count (default 10000)")),
        (("--threads",), dict(type=int, help="worker threads (default 1; results identical)")),
    ]

    add(
        "density",
        "tabulate finite-n and limit coordinate densities on an x grid",
        *common_ball,
        (("--n",), dict(help="comma-separated dimensions for finite-n columns")),
        (("--x-min",), dict(type=float, dest="x_min")),
        (("--x-max",), dict(type=float, dest="x_max")),
        (("--points",), dict(type=int)),
    )
    add(
        "sample",
        "emit uniform sample points of the dimension-n section",
        *common_ball,
        (("--n",), dict(type=int, help="dimension")),
        (("--count",), dict(type=int)),
        (("--seed",), dict(type=int)),
    )
    add(
        "average",
        "closed-form EY (single | multi | blocks | time-weighted | annulus | sweep-R)",
        *common_ball,
        *common_tol,
        (("--g",), dict(help="integrand expression in x (or x1..xm with --intervals)")),
        (("--interval",), dict(help='subinterval "a,b" of [0,1]')),
        (("--intervals",), dict(help='multivariate intervals "a,b;c,d;..."')),
        (("--a",), dict(help="time-weight expression in t")),
        (("--blocks",), dict(help='block scheme "(s,r);(s,r);..."')),
        (("--annulus-r",), dict(type=float, dest="annulus_r", help="inner radius")),
        (("--ratio-n",), dict(type=int, dest="ratio_n", help="dimension for the volume ratio")),
        (("--sweep-R",), dict(dest="sweep_R", help='radius grid "1,2,4,8"')),
        (("--growth",), dict(help='manual growth certificate "C,k"')),
    )
    add(
        "mc",
        "single Monte Carlo estimate of E[Y_n] (optionally under a block scheme)",
        *common_ball,
        *common_mc,
        (("--g",), dict(help="integrand expression in x")),
        (("--n",), dict(type=int, help="dimension")),
        (("--interval",), dict(help='subinterval "a,b"')),
        (("--blocks",), dict(help='block scheme "(s,r);..." (uses weighted sampling)')),
        (("--growth",), dict(help='manual growth certificate "C,k"')),
    )
    add(
        "converge",
        "n sweep: means, variance decay, gap to the closed form",
        *common_ball,
        *common_tol,
        *common_mc,
        (("--g",), dict(help="integrand expression in x")),
        (("--n",), dict(help="comma-separated dimensions")),
        (("--growth",), dict(help='manual growth certificate "C,k"')),
    )
    add(
        "exchange",
        "gap |mean h(Y_n) - h(EY)| along an n sweep",
        *common_ball,
        *common_tol,
        *common_mc,
        (("--g",), dict(help="integrand expression in x")),
        (("--h",), dict(help="outer function expression in x")),
        (("--n",), dict(help="comma-separated dimensions")),
        (("--growth",), dict(help='manual growth certificate "C,k"')),
    )
    add(
        "kernel",
        "finite-n kernel integrals against the exponential-weight limit",
        (("--p",), dict(help='norm exponent, "p0/q0" or decimal')),
        *common_tol,
        (("--f",), dict(help="integrand expression in x (default 1)")),
        (("--n",), dict(help="comma-separated n values")),
        (("--n0",), dict(type=int, help="kernel exponent shift (default 0)")),
        (("--growth",), dict(help='manual growth certificate "C,k"')),
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_values = read_config_file(args.config) if args.config else {}
        opts = Options(args, file_values)
        return COMMANDS[args.command](opts)
    except AccuracyError as exc:
        print(
            json.dumps(
                {
                    "command": args.command,
                    "error": "accuracy",
                    "message": str(exc),
                    "estimate": exc.estimate,
                    "error_bound": exc.error_bound,
                },
                sort_keys=True,
            )
        )
        return 3
    except (ConfigurationError, DomainError, expr.ExprError, OSError) as exc:
        print(f"funcball: error: {exc}", file=sys.stderr)
        return 2
    except FuncballError as exc:
        print(f"funcball: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
