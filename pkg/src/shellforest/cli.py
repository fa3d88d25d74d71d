"""Command line front end: gen | run | verify | bench."""
from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from .engine import check_eps, frac_str, run_shell_decomposition
from .errors import ForestError, InvalidInputError
from .experiment import MODES, run_experiment
from .instances import FAMILIES, InstanceFile, gen_lower_bound, gen_random
from .oracle import MAX_ENUM_EDGES, brute_force_opt, certify_run
from .problems import VARIANTS, check_proper


def rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r} (use p/q)") from None


def index_set(text: str) -> list[int]:
    if text in ("", "-"):
        return []
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps-prime", type=rational, default=Fraction(1, 4), help="SSSP slack, p/q in (0, 1/4]")
    p.add_argument("--eps-dprime", type=rational, default=Fraction(1, 4), help="radius growth, p/q in (0, 1/4]")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--max-oracle-edges", type=int, default=MAX_ENUM_EDGES)
    p.add_argument("--json", action="store_true", help="print one JSON object per instance instead of a table")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shellforest", description="Constrained forest solver, simulator and checker.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="write a generated instance")
    g.add_argument("kind", choices=("random", "lower-bound"))
    g.add_argument("-n", type=int, required=True)
    g.add_argument("-m", type=int, default=None)
    g.add_argument("--family", choices=FAMILIES, default="connected")
    g.add_argument("--max-cost", type=int, default=8)
    g.add_argument("--variant", choices=VARIANTS, default=None, help="default IC (random) or SCR (lower-bound)")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("-k", type=int, default=None, help="label classes (IC, CIC)")
    g.add_argument("--requests", type=int, default=None)
    g.add_argument("--pairs", type=int, default=None, help="|X| = |Y| (PPC)")
    g.add_argument("--clients", type=int, default=None)
    g.add_argument("--rho", type=int, default=3)
    g.add_argument("--A", type=index_set, default=[])
    g.add_argument("--B", type=index_set, default=[])
    g.add_argument("-o", "--output", type=Path, default=None)

    r = sub.add_parser("run", help="solve instance files and certify the results")
    r.add_argument("files", nargs="+", type=Path)
    r.add_argument("--mode", choices=MODES, default="central")
    r.add_argument("--trace", type=Path, default=None, help="write phase traces (central) as JSON lines")
    _common(r)

    v = sub.add_parser("verify", help="axiom sweep, engine run and full certificate chain for one instance")
    v.add_argument("file", type=Path)
    _common(v)

    b = sub.add_parser("bench", help="generate a random suite and run it")
    b.add_argument("--count", type=int, default=50)
    b.add_argument("--n-min", type=int, default=4)
    b.add_argument("--n-max", type=int, default=12)
    b.add_argument("--max-cost", type=int, default=8)
    b.add_argument("--variants", type=lambda s: s.split(","), default=list(VARIANTS))
    b.add_argument("--mode", choices=MODES, default="central")
    _common(b)
    return ap


def cmd_gen(a: argparse.Namespace) -> int:
    if a.kind == "random":
        inst = gen_random(a.family, a.n, a.m, a.max_cost, a.variant or "IC", a.seed, k=a.k,
                          requests=a.requests, pairs=a.pairs, clients=a.clients)
    else:
        inst = gen_lower_bound(a.n, a.rho, a.A, a.B, a.variant or "SCR")
    text = inst.dumps()
    if a.output:
        a.output.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _emit(report, as_json: bool) -> None:
    print(report.json_lines() if as_json else report.table())


def cmd_run(a: argparse.Namespace) -> int:
    check_eps(a.eps_prime, a.eps_dprime)
    items = []
    for path in a.files:
        items.append((str(path), InstanceFile.load(path)))
    report = run_experiment(items, a.mode, a.eps_prime, a.eps_dprime, a.seed, a.max_oracle_edges)
    if a.trace and a.mode in ("central", "oracle"):
        with a.trace.open("w") as fh:
            for name, inst in items:
                g, spec = inst.materialize()
                _, _, rep = run_shell_decomposition(g, spec, a.eps_prime, a.eps_dprime)
                for tr in rep.traces:
                    fh.write(json.dumps({"instance": name, **json.loads(tr.to_json())}) + "\n")
    _emit(report, a.json)
    for row in report.rows:
        if row.error:
            print(f"{row.name}: {row.error}", file=sys.stderr)
    return report.exit_code


def cmd_verify(a: argparse.Namespace) -> int:
    eps_prime, eps_dprime = check_eps(a.eps_prime, a.eps_dprime)
    inst = InstanceFile.load(a.file)
    graph, spec = inst.materialize()
    if graph.n <= 16:
        print("axioms:", check_proper(spec, graph.n).summary())
    forest, lb, rep = run_shell_decomposition(graph, spec, eps_prime, eps_dprime)
    opt = None
    try:
        opt = brute_force_opt(graph, spec, max_edges=a.max_oracle_edges)
    except ForestError as exc:
        print(f"oracle skipped: {exc}")
    cert = certify_run(graph, spec, forest, lb, eps_prime, eps_dprime, opt=opt, strict=False)
    print(f"phases {rep.phases} (bound {rep.phase_bound})")
    print(f"forest {sorted(forest)}")
    out = cert.to_dict()
    out["lb"] = frac_str(cert.lb)
    out["ratio"] = frac_str(cert.ratio)
    print(json.dumps(out, sort_keys=True) if a.json else
          "\n".join(f"{k}: {v}" for k, v in out.items()))
    return 0 if cert.ok else 1


def suite_shape(rng, variant: str, n_min: int, n_max: int, max_m: int = 16) -> tuple[int, int]:
    """Physical (n, m) for a suite instance.  FPC gains a node and n edges on
    load, so its physical part is kept small enough for the oracle."""
    if variant == "FPC":
        n = rng.randint(max(2, n_min - 1), max(2, min(n_max - 1, (max_m + 1) // 2)))
        top = max_m - n
    else:
        n = rng.randint(n_min, n_max)
        top = max_m
    m = rng.randint(n - 1, max(n - 1, min(n * (n - 1) // 2, top)))
    return n, m


def cmd_bench(a: argparse.Namespace) -> int:
    check_eps(a.eps_prime, a.eps_dprime)
    rng = random.Random(a.seed)
    items = []
    for i in range(a.count):
        variant = a.variants[i % len(a.variants)]
        n, m = suite_shape(rng, variant, a.n_min, a.n_max)
        inst = gen_random("connected", n, m, a.max_cost, variant, rng.getrandbits(32))
        items.append((f"bench-{i}-{variant}", inst))
    report = run_experiment(items, a.mode, a.eps_prime, a.eps_dprime, a.seed, a.max_oracle_edges)
    _emit(report, a.json)
    return report.exit_code


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    try:
        return {"gen": cmd_gen, "run": cmd_run, "verify": cmd_verify, "bench": cmd_bench}[a.cmd](a)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
