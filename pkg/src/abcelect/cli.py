"""Command-line interface.

Exit codes: 0 success, 1 semantic error (invalid election, bad option
combination, missing inputs), 2 unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import io as fio
from .dataset import (ElectionSeries, GeneratorConfig, SeriesError, approval_weight_order_statistics,
                      generate, overlap_matrix, relative_changes, reelection_counts,
                      simplicity_statistic, weight_order_statistics)
from .election import Election, ElectionError, normalize, validate
from .representation import (ejr_violations, min_avg_satisfaction, pav_score, priceability_gap,
                             supporting_group_census, weighted_satisfaction)
from .rules import RULES, RuleError, canonical_rule, run_rule
from .security import (backing_variance, maximin_support, min_approval_weight_subset,
                       replacement_cost, stake_lost_curve)

METRICS = ("pav", "satisfaction", "jr", "ejr+", "minavg", "census", "priceability", "mms",
           "stake", "variance", "subset")


class UsageError(Exception):
    """Semantic problem with the request; exit status 1."""


class _Parser(argparse.ArgumentParser):
    # bad flags are usage errors (1); 2 is reserved for unreadable input
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    inputs: list[Path]
    rules: list[str] = field(default_factory=list)
    allow_copies: bool = False
    ballot_cap: int | None = None
    k: int | None = None
    metrics: list[str] = field(default_factory=list)
    l_grid: list[int] | None = None
    committees: list[Path] = field(default_factory=list)
    out: Path | None = None
    time_budget: float | None = None
    seed: int | None = None

    @classmethod
    def from_file(cls, path) -> RunManifest:
        data = fio.load_json(path)
        if not isinstance(data, dict):
            raise fio.ParseError("manifest must hold a JSON object")
        base = Path(path).parent

        def p(x):
            return base / x

        try:
            return cls(
                inputs=[p(x) for x in data.get("inputs", [])],
                rules=list(data.get("rules", [])),
                allow_copies=bool(data.get("allow_copies", False)),
                ballot_cap=data.get("ballot_cap"),
                k=data.get("k"),
                metrics=list(data.get("metrics", [])),
                l_grid=data.get("l_grid"),
                committees=[p(x) for x in data.get("committees", [])],
                out=p(data["out"]) if data.get("out") else None,
                time_budget=data.get("time_budget"),
                seed=data.get("seed"),
            )
        except TypeError as exc:
            raise fio.ParseError(f"malformed manifest: {exc}") from exc


def _parse_grid(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"invalid l grid {text!r}") from None


def _parse_list(text: str | None) -> list[str]:
    if not text:
        return []
    return [x.strip() for x in text.replace(",", " ").split() if x.strip()]


def _manifest(args) -> RunManifest:
    if getattr(args, "manifest", None):
        man = RunManifest.from_file(args.manifest)
    else:
        man = RunManifest(inputs=[Path(x) for x in args.inputs])
    # explicit flags override the manifest
    if getattr(args, "inputs", None) and args.manifest:
        man.inputs = [Path(x) for x in args.inputs]
    if getattr(args, "rule", None):
        man.rules = list(args.rule)
    if getattr(args, "allow_copies", False):
        man.allow_copies = True
    if getattr(args, "ballot_cap", None) is not None:
        man.ballot_cap = args.ballot_cap
    if getattr(args, "k", None) is not None:
        man.k = args.k
    if getattr(args, "metrics", None) is not None:
        man.metrics = _parse_list(args.metrics)
    if getattr(args, "l_grid", None) is not None:
        man.l_grid = _parse_grid(args.l_grid)
    if getattr(args, "committee", None):
        man.committees = [Path(x) for x in args.committee]
    if getattr(args, "out", None):
        man.out = Path(args.out)
    if getattr(args, "time_budget", None) is not None:
        man.time_budget = args.time_budget
    if not man.inputs:
        raise UsageError("no input elections given")
    return man


def _load(path, man: RunManifest | None = None) -> Election:
    e = fio.read_election(path)
    if man is not None:
        if man.k is not None:
            e = e.with_k(man.k)
        if man.ballot_cap is not None:
            e = Election(e.candidates, e.voters, e.exact_weights, e.approvals, e.k,
                         man.ballot_cap, dict(e.meta))
    problems = validate(e)
    if man is not None and man.allow_copies:
        problems = [p for p in problems if p != "k exceeds candidate count"]
    if problems:
        raise UsageError(f"{path}: " + "; ".join(problems))
    return normalize(e)


def _emit(out: Path | None, name: str, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        fio.write_text(out / name, text)


# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    status = 0
    for path in args.inputs:
        problems = validate(fio.read_election(path))
        if problems:
            status = 1
            for p in problems:
                print(f"{path}: {p}")
        else:
            print(f"{path}: ok")
    return status


def cmd_run(args) -> int:
    man = _manifest(args)
    if not man.rules:
        raise UsageError("no rule selected (use --rule)")
    rules = [canonical_rule(r) for r in man.rules]
    for path in man.inputs:
        e = _load(path, man)
        stem = Path(path).stem
        for rule in rules:
            committee, trace = run_rule(rule, e, allow_copies=man.allow_copies)
            _emit(man.out, f"{stem}.{rule}.committee.json",
                  fio.dumps(fio.committee_to_json(e, rule, committee, man.allow_copies)))
            _emit(man.out, f"{stem}.{rule}.trace.json", fio.dumps(trace.to_json(e)))
    return 0


def _grid(man: RunManifest, top: int) -> list[int]:
    grid = man.l_grid if man.l_grid is not None else list(range(1, top + 1))
    bad = [l for l in grid if not 1 <= l <= top]
    if bad:
        raise UsageError(f"l grid values {bad} outside 1..{top}")
    return grid


def measure_rows(e: Election, committee: list[int], metrics, man: RunManifest,
                 allow_copies: bool = False) -> list[tuple]:
    """Rows (metric, l, value, witness) for the requested metrics."""
    ids = e.candidates
    rows: list[tuple] = []

    def names(cands):
        return ";".join(ids[c] for c in cands)

    mms = None
    for metric in metrics:
        if metric == "pav":
            rows.append(("pav", None, pav_score(e, committee), ""))
        elif metric == "satisfaction":
            rows.append(("satisfaction", None, weighted_satisfaction(e, committee), ""))
        elif metric in ("jr", "ejr+"):
            count, bad = ejr_violations(e, committee, metric.upper(), allow_copies)
            rows.append((metric, None, count, names(bad)))
        elif metric == "minavg":
            for l in _grid(man, e.k):
                r = min_avg_satisfaction(e, committee, l, allow_copies)
                wit = "" if r.candidate is None else f"{ids[r.candidate]}:" + ";".join(e.voters[v] for v in r.group)
                if not r.exact:
                    wit += " (bound)"
                rows.append(("minavg", l, r.value if r.value is not None else "none", wit))
        elif metric == "census":
            rep = supporting_group_census(e, committee, allow_copies, ls=_grid(man, e.k))
            rows.extend(("census", rec.l, rec.census, "") for rec in rep.records)
        elif metric == "priceability":
            r = priceability_gap(e, committee, allow_copies)
            rows.append(("gap", None, r.gap, r.diagnostic))
            rows.append(("normalized_gap", None, r.normalized_gap if r.normalized_gap is not None else "none", ""))
            rows.append(("price", None, r.system.price, ""))
            rows.append(("exceeding", None, len(r.exceeding), names(r.exceeding)))
        elif metric in ("mms", "stake", "variance"):
            if mms is None:
                mms = maximin_support(e, committee)
            value, assignment = mms
            if metric == "mms":
                rows.append(("mms", None, value, ""))
            elif metric == "variance":
                rows.append(("variance", None, backing_variance(assignment), ""))
            else:
                curve = stake_lost_curve(e, committee, assignment)
                rows.extend(("stake", l, float(curve[l - 1]), "") for l in _grid(man, len(committee)))
        elif metric == "subset":
            for l in _grid(man, len(committee)):
                r = min_approval_weight_subset(e, committee, l, time_budget=man.time_budget)
                wit = names(committee[j] for j in r.subset)
                if not r.optimal:
                    wit += f" (bound {r.bound!r})"
                rows.append(("subset", l, r.weight, wit))
        else:
            raise UsageError(f"unknown metric {metric!r}; expected one of {', '.join(METRICS)}")
    return rows


def cmd_measure(args) -> int:
    man = _manifest(args)
    metrics = [m.lower() for m in man.metrics]
    if not metrics:
        raise UsageError("empty metric list (use --metrics)")
    for m in metrics:
        if m not in METRICS:
            raise UsageError(f"unknown metric {m!r}; expected one of {', '.join(METRICS)}")
    if not man.committees and not man.rules:
        raise UsageError("no committee given (use --committee or --rule)")
    for path in man.inputs:
        e = _load(path, man)
        stem = Path(path).stem
        jobs = []
        for cpath in man.committees:
            data = fio.load_json(cpath)
            rule, committee = fio.committee_from_json(data, e)
            jobs.append((rule, committee, bool(data.get("allow_copies", False))))
        for rule in man.rules:
            rule = canonical_rule(rule)
            jobs.append((rule, list(run_rule(rule, e, man.allow_copies)[0]), man.allow_copies))
        for rule, committee, copies in jobs:
            if not committee:
                raise UsageError("committee is empty")
            rows = measure_rows(e, committee, metrics, man, copies)
            _emit(man.out, f"{stem}.{rule}.measures.csv",
                  fio.csv_text(("metric", "l", "value", "witness"), rows))
    return 0


def cmd_dataset_stats(args) -> int:
    src = Path(args.inputs)
    files = sorted(src.glob("*.json")) if src.is_dir() else [src]
    if not files:
        raise UsageError(f"no election files in {src}")
    elections = [fio.read_election(f) for f in files]
    try:
        series = ElectionSeries.from_elections(elections)
    except SeriesError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out) if args.out else None
    rows = []
    for (a, e1), (b, e2) in series.pairs():
        ch = relative_changes(e1, e2)
        rows.append((a, b, ch.voter_set, ch.weight if ch.weight is not None else "none",
                     ch.opinion if ch.opinion is not None else "none", ch.candidate_set))
    _emit(out, "changes.csv", fio.csv_text(
        ("era_from", "era_to", "voter_set", "weight", "opinion", "candidate_set"), rows))

    order_rows, half_rows, simp_rows = [], [], []
    for era, e in series.items:
        ne = normalize(e)
        ws, aw = weight_order_statistics(ne), approval_weight_order_statistics(ne)
        order_rows.extend((era, "weight", i + 1, float(x)) for i, x in enumerate(ws.values))
        order_rows.extend((era, "approval_weight", i + 1, float(x)) for i, x in enumerate(aw.values))
        half_rows.append((era, e.n, ws.half_prefix))
        s = simplicity_statistic(e)
        simp_rows.append((era, s if s is not None else "none"))
    _emit(out, "order_statistics.csv", fio.csv_text(("era", "kind", "rank", "value"), order_rows))
    _emit(out, "half_weight.csv", fio.csv_text(("era", "voters", "half_prefix"), half_rows))
    _emit(out, "simplicity.csv", fio.csv_text(("era", "value"), simp_rows))

    rules = [canonical_rule(r) for r in (args.rule or [])]
    if rules:
        committees = {r: [] for r in rules}
        for era, e in series.items:
            ne = normalize(e)
            for r in rules:
                committees[r].append([ne.candidates[c] for c in run_rule(r, ne)[0]])
        total = None
        for i in range(len(series)):
            names, mat = overlap_matrix({r: committees[r][i] for r in rules})
            total = mat if total is None else total + mat
        avg = total / len(series)
        _emit(out, "overlap.csv", fio.csv_text(
            ["rule", *names], ([r, *[float(x) for x in row]] for r, row in zip(names, avg))))
        re_rows = [(r, a, b, c) for r in rules
                   for (a, b), c in zip(zip(series.labels, series.labels[1:]), reelection_counts(committees[r]))]
        _emit(out, "reelection.csv", fio.csv_text(("rule", "era_from", "era_to", "reelected"), re_rows))
    return 0


def cmd_generate(args) -> int:
    try:
        cfg = GeneratorConfig(n=args.n, m=args.m, k=args.k, ballot_cap=args.ballot_cap,
                              weights=args.weights, pareto_shape=args.alpha,
                              approvals=args.model, clusters=args.clusters, seed=args.seed)
    except ElectionError as exc:
        raise UsageError(str(exc)) from None
    e = generate(cfg, normalized=False)
    if args.era is not None:
        e.meta["era"] = args.era
    text = fio.dumps(fio.election_to_json(e))
    if args.out:
        fio.write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_replace_cost(args) -> int:
    e = _load(args.inputs)
    rule = canonical_rule(args.rule)
    cap = args.ballot_cap if args.ballot_cap is not None else e.ballot_cap
    _, trace = run_rule(rule, e)
    grid = _parse_grid(args.l_grid) or list(range(1, e.k + 1))
    if any(not 1 <= l <= e.k for l in grid):
        raise UsageError(f"l grid must lie in 1..{e.k}")
    rows = []
    for l in grid:
        q = replacement_cost(rule, trace, l, cap)
        witness = ";".join(f"{w!r}:{'+'.join(str(c + 1) for c in b)}" for w, b in q.witness)
        rows.append((rule, l, q.cost, q.voter_count, witness))
    text = fio.csv_text(("rule", "l", "cost", "voters", "witness"), rows)
    if args.out:
        fio.write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="abcelect", description="Weighted approval-based committee elections.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", help="check election files")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(func=cmd_validate)

    def common(p, rules_required=False):
        p.add_argument("inputs", nargs="*", help="election files")
        p.add_argument("--manifest", help="JSON run manifest")
        p.add_argument("--rule", action="append", help=f"one of {', '.join(RULES)} (repeatable)")
        p.add_argument("--k", type=int, help="override the committee size")
        p.add_argument("--ballot-cap", type=int, help="override the ballot cap")
        p.add_argument("--allow-copies", action="store_true", help="allow several copies of a candidate")
        p.add_argument("--out", help="output directory (default: standard output)")

    p = sub.add_parser("run", help="compute committees and selection traces")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("measure", help="compute representation and security measures")
    common(p)
    p.add_argument("--committee", action="append", help="committee JSON file (repeatable)")
    p.add_argument("--metrics", help=f"comma-separated subset of {', '.join(METRICS)}")
    p.add_argument("--l-grid", help="comma-separated l values")
    p.add_argument("--time-budget", type=float, help="seconds per subset search")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("dataset-stats", help="statistics over an era series")
    p.add_argument("inputs", help="directory of election files with meta.era")
    p.add_argument("--rule", action="append", help="rules for overlap matrices")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_dataset_stats)

    p = sub.add_parser("generate", help="write a synthetic election")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ballot-cap", type=int, default=16)
    p.add_argument("--weights", choices=("uniform", "pareto"), default="uniform")
    p.add_argument("--alpha", type=float, default=1.5, help="pareto shape")
    p.add_argument("--model", choices=("impartial", "clustered"), default="impartial")
    p.add_argument("--clusters", type=int, default=5)
    p.add_argument("--era", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("replace-cost", help="closed-form replacement costs")
    p.add_argument("inputs", help="election file")
    p.add_argument("--rule", required=True)
    p.add_argument("--l-grid")
    p.add_argument("--ballot-cap", type=int)
    p.add_argument("--out", help="output CSV file")
    p.set_defaults(func=cmd_replace_cost)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except fio.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UsageError, RuleError, ElectionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
