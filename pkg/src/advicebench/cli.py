"""Command-line front door.  Every command prints CSV or JSON to stdout."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import config
from .config import DEFAULT_SEED, CapExceeded
from .core import expected_cost
from .games import CostMatrix, GameSolveError, rmg_advice_alg, rmg_random_alg, solve_game
from .guessing import (
    build_anticover,
    first_fit_alg,
    guessing_problem,
    hsgg_simulate,
    pair_cost,
    random_hsgg_instance,
    replay_x_alg,
    uniform_hard_distribution,
    variant_matrix,
)
from .infotheory import NAMED_BOUNDS, DomainError, antisg_upper, evaluate
from .oracle import CERTIFIABLE, certify_bound
from .reductions import antisg_to_paging, bsg_to_binpack, first_fit_packer, lru_policy, mistake_audit, simulate_paging
from . import infotheory


class UsageError(Exception):
    pass


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def _extra_params(extra: list[str]) -> dict:
    out, i = {}, 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise UsageError(f"unexpected argument {tok!r}")
        key = tok[2:].replace("-", "_")
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise UsageError(f"missing value for {tok}")
            val = extra[i + 1]
            i += 2
        out[key] = _number(val)
    return out


def _grid(text: str) -> list:
    return [_number(t) for t in text.split(",") if t.strip()]


def _spec(text: str) -> tuple[str, dict]:
    """'kind:key=val,key=val' -> (kind, params)."""
    kind, _, rest = text.partition(":")
    params = {}
    for part in filter(None, rest.split(",")):
        k, _, v = part.partition("=")
        params[k.strip()] = _number(v)
    return kind, params


def emit(rows: list[dict], fmt: str, header: list[str] | None = None, extra: dict | None = None) -> str:
    if fmt == "json":
        doc = dict(extra or {})
        doc["rows"] = rows
        return json.dumps(doc, sort_keys=True) + "\n"
    header = header or (list(rows[0]) if rows else [])
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in header})
    return buf.getvalue()


# ------------------------------------------------------------- commands


def cmd_bound(args, extra) -> tuple[str, int]:
    params = _extra_params(extra)
    if args.formula not in NAMED_BOUNDS:
        raise UsageError(f"unknown formula {args.formula!r}; choose from {sorted(NAMED_BOUNDS)}")
    res = evaluate(args.formula, **params)
    row = {"formula": res.formula_id, "value": res.value, "regime": res.regime}
    return emit([row], args.format, ["formula", "value", "regime"], {"params": params}), 0


def cmd_solve_game(args, extra) -> tuple[str, int]:
    text = args.matrix
    if not text.lstrip().startswith("{"):
        with open(text) as fh:
            text = fh.read()
    A = CostMatrix.from_json(text)
    sol = solve_game(A, exact=args.exact)
    row = {"value": sol.value, "row_strategy": list(sol.row_strategy.probs), "col_strategy": list(sol.col_strategy.probs)}
    if sol.exact_value is not None:
        row["exact_value"] = str(sol.exact_value)
    if args.format == "json":
        return json.dumps(row, sort_keys=True) + "\n", 0
    flat = {"value": sol.value, "exact_value": row.get("exact_value")}
    for i, p in enumerate(sol.row_strategy.probs):
        flat[f"mu{i}"] = p
    for i, p in enumerate(sol.col_strategy.probs):
        flat[f"nu{i}"] = p
    return emit([flat], "csv", list(flat)), 0


def cmd_simulate(args, extra) -> tuple[str, int]:
    p = _extra_params(extra)
    n, q = int(p.get("n", 8)), int(p.get("q", 2))
    if args.problem == "hsgg":
        k = int(p.get("k", 4))
        algs = {"replay-x": replay_x_alg(k), "first-fit": first_fit_alg()}
        if args.alg not in algs:
            raise UsageError(f"hsgg algorithms: {sorted(algs)}")
        costs, pairs = [], []
        for i in range(args.trials):
            rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(i,)))
            inst = random_hsgg_instance(n, k, rng)
            c, y = hsgg_simulate(algs[args.alg], inst)
            costs.append(c)
            pairs.append(pair_cost(y, inst))
        arr = np.array(costs, dtype=float)
        row = {"problem": "hsgg", "alg": args.alg, "n": n, "k": k, "trials": args.trials,
               "mean_cost": float(arr.mean()), "max_cost": float(arr.max()), "mean_pair_cost": float(np.mean(pairs))}
        return emit([row], args.format, list(row)), 0
    if args.problem not in ("sgkh", "anti", "bsg"):
        raise UsageError("problem must be sgkh, anti, bsg or hsgg")
    s, t = p.get("s", 1), p.get("t", 1)
    if args.problem == "bsg":
        q = 2
    A = variant_matrix(args.problem, q, s, t)
    prob = guessing_problem(args.problem, q, s, t)
    if args.problem == "bsg":
        from .games import rmg_hard_distribution

        dist = rmg_hard_distribution(A, n)
    else:
        dist = uniform_hard_distribution(q, n, args.problem)
    algs = {"rmg-random": rmg_random_alg(A), "rmg-advice": rmg_advice_alg(A)}
    if args.alg not in algs:
        raise UsageError(f"algorithms: {sorted(algs)}")
    est = expected_cost(prob, algs[args.alg], dist, "monte_carlo", args.trials, args.seed)
    row = {"problem": args.problem, "alg": args.alg, "q": q, "n": n, "trials": args.trials,
           "mean": est.mean, "stderr": est.stderr, "value_times_n": solve_game(A).value * n}
    return emit([row], args.format, list(row)), 0


def cmd_anticover(args, extra) -> tuple[str, int]:
    code = build_anticover(args.q, args.n, args.alpha, seed=args.seed)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(code.to_text())
    row = {"q": args.q, "n": args.n, "alpha": args.alpha, "radius": code.radius, "sampled": code.sampled,
           "size": len(code), "advice_bits": code.advice_bits(),
           "antisg_upper": antisg_upper(args.q, args.alpha, args.n).value, "verified": code.verify()}
    return emit([row], args.format, list(row)), 0


def _certify_setup(formula: str, spec: str):
    kind, sp = _spec(spec)
    if kind in ("sgkh", "anti"):
        q, n = int(sp.get("q", 2)), int(sp["n"])
        prob = guessing_problem(kind, q)
        dist = uniform_hard_distribution(q, n, kind)
        t = n * (q - 1) / q if kind == "sgkh" else n / q
        params = {"q": q, "n": n, "t": t, "M": n, "r": 1, "L": n}
    elif kind == "repsg":
        q, L, r = int(sp.get("q", 2)), int(sp["L"]), int(sp["r"])
        prob = guessing_problem("sgkh", q)
        dist = uniform_hard_distribution(q, L * r, "sgkh")
        params = {"q": q, "n": L * r, "t": L * (q - 1) / q, "M": L, "r": r, "L": L}
    elif kind == "bsg":
        s, t, n = sp.get("s", 1), sp.get("t", 1), int(sp["n"])
        A = variant_matrix("bsg", 2, s, t)
        from .games import rmg_hard_distribution

        prob = guessing_problem("bsg", 2, s, t)
        dist = rmg_hard_distribution(A, n)
        params = {"s": s, "t": t, "n": n}
    else:
        raise UsageError("instance spec kinds: sgkh:q=..,n=.. | anti:q=..,n=.. | repsg:q=..,L=..,r=.. | bsg:s=..,t=..,n=..")
    return prob, dist, params


def cmd_certify(args, extra) -> tuple[str, int]:
    if args.formula not in CERTIFIABLE:
        raise UsageError(f"certifiable formulas: {list(CERTIFIABLE)}")
    prob, dist, params = _certify_setup(args.formula, args.instance)
    grid = [int(b) for b in _grid(args.b_grid)]
    rep = certify_bound(args.formula, params, prob, dist, grid)
    rows = [r.as_dict() for r in rep.rows]
    out = emit(rows, args.format, ["b", "formula", "bound", "brute_force", "slack", "sound"], {"sound": rep.sound})
    return out, 0 if rep.sound else 1


def cmd_reduce(args, extra) -> tuple[str, int]:
    p = _extra_params(extra)
    x = tuple(int(c) for c in args.input)
    if args.kind == "paging":
        k = int(p.get("k", max(x) if x else 1))
        inst = antisg_to_paging(x, k)
        faults = simulate_paging(lru_policy, k, inst.sigma, inst.initial)
        doc = json.loads(inst.to_json())
        doc["lru_faults"] = int(sum(faults))
        if args.format == "json":
            return json.dumps(doc, sort_keys=True) + "\n", 0
        rows = [{"i": i, "page": pg, "lru_fault": int(f)} for i, (pg, f) in enumerate(zip(inst.sigma, faults))]
        return emit(rows, "csv", ["i", "page", "lru_fault"]), 0
    if args.kind == "binpack":
        eps = Fraction(str(p["eps"])) if "eps" in p else None
        inst = bsg_to_binpack(x, eps)
        audit = mistake_audit(first_fit_packer, x, eps)
        doc = json.loads(inst.to_json())
        doc.update({"opt": inst.n, "ff_bins": audit.bins, "e0": audit.e0, "e1": audit.e1,
                    "e0_ok": audit.e0_ok, "e1_ok": audit.e1_ok})
        if args.format == "json":
            return json.dumps(doc, sort_keys=True) + "\n", 0
        rows = [{"i": i, "size": s} for i, s in enumerate(doc["items"])]
        return emit(rows, "csv", ["i", "size"]), 0
    raise UsageError("reduce kinds: paging, binpack")


def cmd_tradeoff(args, extra) -> tuple[str, int]:
    p = _extra_params(extra)
    rows = []
    for a in _grid(args.alpha_grid):
        if args.variant == "sgkh":
            lo = infotheory.sg_lower(args.q, a, args.n).value
            hi = infotheory.sg_upper(args.q, a, args.n).value
        elif args.variant == "anti":
            lo = infotheory.antisg_lower(args.q, a, args.n).value
            hi = infotheory.antisg_upper(args.q, a, args.n).value
        elif args.variant == "bsg":
            lo = infotheory.bsg_lower(p.get("s", 1), p.get("t", 1), a, args.n).value
            hi = None
        else:
            raise UsageError("variants: sgkh, anti, bsg")
        rows.append({"alpha": a, "lower_bits": lo, "upper_bits": hi})
    return emit(rows, args.format, ["alpha", "lower_bits", "upper_bits"]), 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", default=None, help="JSON file with defaults and caps")

    ap = argparse.ArgumentParser(prog="advicebench", description=__doc__, parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", parents=[common], help="evaluate a named bound; extra --key value pairs are its parameters")
    b.add_argument("formula")
    b.set_defaults(func=cmd_bound)

    g = sub.add_parser("solve-game", parents=[common], help="solve a cost matrix given as JSON")
    g.add_argument("matrix", help="JSON file, or the JSON text itself")
    g.add_argument("--exact", action="store_true")
    g.set_defaults(func=cmd_solve_game)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo run of an algorithm")
    s.add_argument("problem")
    s.add_argument("alg")
    s.add_argument("--trials", type=int, default=1000)
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("anticover", parents=[common], help="build and verify an anti-covering code")
    a.add_argument("q", type=int)
    a.add_argument("n", type=int)
    a.add_argument("alpha", type=float)
    a.add_argument("--out", default=None)
    a.set_defaults(func=cmd_anticover)

    c = sub.add_parser("certify", parents=[common], help="check a bound against the brute-force oracle")
    c.add_argument("formula")
    c.add_argument("instance", help="e.g. sgkh:q=2,n=3 or repsg:q=2,L=2,r=2")
    c.add_argument("--b-grid", default="0,1,2")
    c.set_defaults(func=cmd_certify)

    r = sub.add_parser("reduce", parents=[common], help="generate a reduction instance")
    r.add_argument("kind", choices=("paging", "binpack"))
    r.add_argument("input", help="the string x as digits")
    r.set_defaults(func=cmd_reduce)

    t = sub.add_parser("tradeoff", parents=[common], help="lower and upper advice curves over alpha")
    t.add_argument("variant", choices=("sgkh", "anti", "bsg"))
    t.add_argument("--q", type=int, default=2)
    t.add_argument("--n", type=int, default=100)
    t.add_argument("--alpha-grid", default="0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45")
    t.set_defaults(func=cmd_tradeoff)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args, extra = ap.parse_known_args(argv)
    try:
        cfg = config.load_config(args.config)
        args.format = args.format or cfg.get("format", "json")
        args.seed = args.seed if args.seed is not None else int(cfg.get("seed", DEFAULT_SEED))
        config.set_caps(config.load_caps(cfg))
        if extra and args.command not in ("bound", "simulate", "reduce", "tradeoff"):
            raise UsageError(f"unrecognized arguments: {' '.join(extra)}")
        out, code = args.func(args, extra)
    except UsageError as e:
        ap.print_usage(sys.stderr)
        print(f"advicebench: error: {e}", file=sys.stderr)
        return 2
    except CapExceeded as e:
        print(json.dumps(e.as_dict(), sort_keys=True))
        return 3
    except (DomainError, GameSolveError, ValueError, OSError) as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}, sort_keys=True))
        return 2
    finally:
        config.set_caps(None)
    sys.stdout.write(out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
