"""``rig-giant`` command line.

Exit status: 0 on success, 2 on configuration errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import hypergeom
from .branching import predict
from .dist import DistributionError
from .explore import big_vertex_census
from .graphgen import (
    GraphError,
    GraphParams,
    attribute_multiplicity,
    component_census,
    degree_census,
    limit_degree_pmf,
    sample_graph,
    tv_distance,
    write_graph,
)
from .harness import (
    ConfigError,
    emit_report,
    load_config,
    parse_distribution,
    parse_pmf_string,
    render_report,
    resolve_omega,
    run_experiment,
    summary_json,
)


def _add_dist_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--dist", metavar="FILE", help="JSON/YAML file with a 'family' or 'pmf' entry")
    g.add_argument("--pmf", metavar="T:P,...", help='inline pmf, e.g. "0:0.5,3:0.5"')
    g.add_argument("--family", metavar="NAME[:K=V,...]", help='named family, e.g. "point:t=2"')


def _load_dist(args):
    if args.pmf:
        return parse_pmf_string(args.pmf)
    if args.family:
        name, _, rest = args.family.partition(":")
        params = {}
        for item in filter(None, rest.split(",")):
            key, _, val = item.partition("=")
            try:
                params[key] = int(val)
            except ValueError:
                try:
                    params[key] = float(val)
                except ValueError:
                    raise ConfigError(f"bad family parameter {item!r}") from None
        return parse_distribution({"family": name, "params": params})
    path = Path(args.dist)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if path.suffix in (".yaml", ".yml"):
        import yaml

        raw = yaml.safe_load(text)
    else:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if isinstance(raw, dict) and "distribution" in raw:
        raw = raw["distribution"]
    return parse_distribution(raw)


def _emit(payload, out):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_rho(args):
    Q = _load_dist(args)
    pred = predict(Q, args.beta)
    sol = pred.solution
    payload = {
        "beta": args.beta,
        "q0": pred.q0,
        "theta": pred.theta,
        "rho_tilde": pred.rho_tilde,
        "prediction": pred.fraction,
        "prediction_direct": pred.direct,
        "iterations": sol.iterations if sol else 0,
        "residual": sol.residual if sol else 0.0,
        "extinct": {str(k): v for k, v in (sol.extinct_table if sol else {}).items()},
        "survive": {str(k): v for k, v in (sol.survive_table if sol else {}).items()},
    }
    _emit(payload, args.out)


def _sample(args):
    Q = _load_dist(args)
    params = GraphParams.from_beta(args.n, args.beta)
    return Q, sample_graph(params, Q, args.seed)


def cmd_simulate(args):
    Q, g = _sample(args)
    cc = component_census(g)
    mult = attribute_multiplicity(g)
    pred = predict(Q, args.beta).fraction
    if args.dump:
        write_graph(g, args.dump)
    _emit(
        {
            "n": g.n,
            "m": g.m,
            "seed": args.seed,
            "n1": cc.n1,
            "n1_frac": cc.n1 / g.n,
            "pred": pred,
            "components": cc.count,
            "max_fw": mult.max_f,
            "fw_bound": mult.bound,
            "fw_bound_ok": mult.bound_ok,
        },
        args.out,
    )


def cmd_degree(args):
    Q, g = _sample(args)
    dc = degree_census(g)
    kmax = max(args.kmax, dc.pmf.size - 1)
    limit, tail = limit_degree_pmf(Q, args.beta, kmax)
    _emit(
        {
            "n": g.n,
            "m": g.m,
            "seed": args.seed,
            "mean_degree": dc.mean,
            "empirical": dc.pmf.tolist(),
            "limit": limit.tolist(),
            "limit_tail": tail,
            "tv": tv_distance(dc.pmf, limit, tol=max(1e-6, 2 * tail)),
        },
        args.out,
    )


def _frac(x):
    if x is None:
        return None
    return {"exact": str(x), "float": float(x)} if isinstance(x, Fraction) else float(x)


def cmd_hypergeom(args):
    if args.grid:
        checked, vacuous, failures = hypergeom.verify_grid(4, args.kmax)
        _emit(
            {
                "k_range": [4, args.kmax],
                "checked": checked,
                "vacuous": vacuous,
                "failures": [list(f) for f in failures],
                "ok": not failures,
            },
            args.out,
        )
        return
    if args.a is None or args.b is None or args.k is None:
        raise ConfigError("--a, --b and --k are required unless --grid is given")
    a, b, h, k = args.a, args.b, args.h, args.k
    try:
        probs = hypergeom.closed_forms(a, b, h, k)
        reports = hypergeom.check_lemma1(a, b, h, k) if k >= 4 and a + b <= k else []
    except hypergeom.QueryError as exc:
        raise ConfigError(str(exc)) from exc
    _emit(
        {
            "query": {"a": a, "b": b, "h": h, "k": k},
            "probabilities": {name: _frac(v) for name, v in vars(probs).items()},
            "bounds": [
                {
                    "name": r.name,
                    "value": _frac(r.value),
                    "lower": _frac(r.lower),
                    "upper": _frac(r.upper),
                    "holds": r.holds,
                    "vacuous": r.vacuous,
                }
                for r in reports
            ],
        },
        args.out,
    )


def cmd_explore(args):
    Q, g = _sample(args)
    omega = resolve_omega(args.omega, g.n)
    census = big_vertex_census(g, omega)
    payload = census.as_dict()
    payload.update({"m": g.m, "seed": args.seed, "pred": predict(Q, args.beta).fraction})
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["vertex", "big_full", "big_regular", "big_simple"])
            for v in range(g.n):
                w.writerow([v, int(census.big_full[v]), int(census.big_regular[v]), int(census.big_simple[v])])
    _emit(payload, args.out)


def cmd_experiment(args):
    cfg = load_config(args.config, output=args.out, format=args.format)
    result = run_experiment(cfg)
    if cfg.output:
        emit_report(result.rows, cfg.output, cfg.format)
        sys.stdout.write(summary_json(result) + "\n")
    else:
        sys.stdout.write(render_report(result.rows, cfg.format))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rig-giant", description="Random intersection graph giant-component toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rho", help="solve the branching fixed point and predict the giant fraction")
    p.add_argument("--beta", type=float, required=True)
    _add_dist_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rho)

    for name, func, helptext in (
        ("simulate", cmd_simulate, "sample one graph and report its largest component"),
        ("degree", cmd_degree, "compare the empirical degree law with its limit"),
        ("explore", cmd_explore, "big-vertex censuses for the three exploration modes"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--beta", type=float, required=True)
        _add_dist_args(p)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")
        if name == "simulate":
            p.add_argument("--dump", help="write the sampled graph as text")
        if name == "degree":
            p.add_argument("--kmax", type=int, default=60)
        if name == "explore":
            p.add_argument("--omega", default="log", help="log, twothirds or an integer")
            p.add_argument("--csv", help="per-vertex flag dump")
        p.set_defaults(func=func)

    p = sub.add_parser("experiment", help="run a replicate sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("hypergeom", help="intersection probabilities and their bounds")
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--h", type=int, default=0)
    p.add_argument("--k", type=int)
    p.add_argument("--grid", action="store_true", help="sweep all a+b+h <= k for 4 <= k <= --kmax")
    p.add_argument("--kmax", type=int, default=60)
    p.add_argument("--out")
    p.set_defaults(func=cmd_hypergeom)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ConfigError, DistributionError, GraphError, hypergeom.QueryError) as exc:
        print(f"rig-giant: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"rig-giant: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
