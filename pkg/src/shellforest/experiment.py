"""Batch runs over instance files with certificates and a report table."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

from .engine import QUARTER, frac_str, run_gw_reference, run_shell_decomposition
from .errors import ForestError
from .instances import InstanceFile
from .oracle import MAX_ENUM_EDGES, brute_force_opt, certify_run
from .problems import Fpc

MODES = ("central", "distributed", "gw-ref", "oracle")


@dataclass
class Row:
    name: str
    tag: str
    n: int
    m: int
    status: str = "ok"
    cost: int | None = None
    lb: Fraction | None = None
    ratio: Fraction | None = None
    opt: int | None = None
    phases: int | None = None
    forest: list[int] = field(default_factory=list)
    rounds: dict[str, int] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)
    failed: list[str] = field(default_factory=list)
    error: str = ""

    def to_dict(self) -> dict[str, Any]:
        d = {
            "name": self.name, "tag": self.tag, "n": self.n, "m": self.m, "status": self.status,
            "cost": self.cost, "lb": frac_str(self.lb) if self.lb is not None else None,
            "ratio": frac_str(self.ratio) if self.ratio is not None else None,
            "opt": self.opt, "phases": self.phases, "forest": self.forest,
        }
        if self.rounds:
            d["rounds"] = self.rounds
        if self.extra:
            d.update(self.extra)
        if self.failed:
            d["failed"] = self.failed
        if self.error:
            d["error"] = self.error
        return d


@dataclass
class ExperimentReport:
    mode: str
    rows: list[Row]

    @property
    def failures(self) -> int:
        return sum(r.status == "FAIL" for r in self.rows)

    @property
    def errors(self) -> int:
        return sum(r.status == "error" for r in self.rows)

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0

    def table(self) -> str:
        head = ["instance", "tag", "n", "m", "status", "cost", "LB", "ratio*LB", "OPT", "phases"]
        if self.mode == "distributed":
            head += ["rounds", "D", "T_PA"]
        body = []
        for r in self.rows:
            line = [
                r.name, r.tag, str(r.n), str(r.m), r.status,
                "-" if r.cost is None else str(r.cost),
                "-" if r.lb is None else f"{float(r.lb):.3f}",
                "-" if r.lb is None or r.ratio is None else f"{float(r.ratio * r.lb):.3f}",
                "-" if r.opt is None else str(r.opt),
                "-" if r.phases is None else str(r.phases),
            ]
            if self.mode == "distributed":
                line += [str(sum(r.rounds.values())) if r.rounds else "-",
                         str(r.extra.get("D", "-")), str(r.extra.get("T_PA", "-"))]
            body.append(line)
        widths = [max(len(x) for x in col) for col in zip(head, *body)]
        out = ["  ".join(h.ljust(w) for h, w in zip(head, widths))]
        out.append("  ".join("-" * w for w in widths))
        for line in body:
            out.append("  ".join(x.ljust(w) for x, w in zip(line, widths)))
        out.append(f"{len(self.rows)} instances, {self.failures} certification failures, {self.errors} errors")
        return "\n".join(out)

    def json_lines(self) -> str:
        return "\n".join(json.dumps(r.to_dict(), sort_keys=True) for r in self.rows)


def run_one(
    name: str,
    inst: InstanceFile,
    mode: str,
    eps_prime: Fraction = QUARTER,
    eps_dprime: Fraction = QUARTER,
    seed: int | None = None,
    max_oracle_edges: int = MAX_ENUM_EDGES,
) -> Row:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {', '.join(MODES)}")
    row = Row(name, inst.tag, inst.n, len(inst.edges))
    try:
        graph, spec = inst.materialize()
        row.n, row.m = graph.n, graph.m
        opt = None
        if mode == "gw-ref":
            forest, lb = run_gw_reference(graph, spec)
            ep = ed = Fraction(0)
        elif mode == "distributed":
            from .congest.runner import run_distributed_cfp

            forest, lb, rep = run_distributed_cfp(graph, spec, eps_prime, eps_dprime, seed)
            ep, ed = eps_prime, eps_dprime
            row.phases = rep.phases
            row.rounds = rep.total_rounds()
            row.extra = {k: rep.extra[k] for k in ("D", "T_PA", "setup_rounds", "kappa", "messages")}
        else:
            forest, lb, rep = run_shell_decomposition(graph, spec, eps_prime, eps_dprime)
            ep, ed = eps_prime, eps_dprime
            row.phases = rep.phases
            if mode == "oracle":
                opt = brute_force_opt(graph, spec, max_edges=max_oracle_edges)
        cert = certify_run(graph, spec, forest, lb, ep, ed, opt=opt, strict=False)
        row.cost, row.lb, row.ratio, row.opt = cert.cost, cert.lb, cert.ratio, cert.opt
        row.forest = sorted(forest)
        if isinstance(spec, Fpc):
            row.extra["facilities"] = spec.facilities(graph, forest)
        if not cert.ok:
            row.status = "FAIL"
            row.failed = cert.failed()
    except ForestError as exc:
        row.status = "error"
        row.phases = None
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def run_experiment(
    instances: Iterable[tuple[str, InstanceFile]],
    mode: str = "central",
    eps_prime: Fraction = QUARTER,
    eps_dprime: Fraction = QUARTER,
    seed: int | None = None,
    max_oracle_edges: int = MAX_ENUM_EDGES,
) -> ExperimentReport:
    """Run every instance; the report's exit code is 1 iff a certificate failed."""
    rows = [run_one(name, inst, mode, eps_prime, eps_dprime, seed, max_oracle_edges) for name, inst in instances]
    return ExperimentReport(mode, rows)
