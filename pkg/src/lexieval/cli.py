"""Command-line interface: ``lexieval <subcommand> [flags]``.

Exit status is 0 on success, 1 on usage errors and 2 on data errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from typing import Any, Optional, Sequence

from . import experiments as ex
from . import theory
from .ingest import read_qrels, read_run, read_runs, synth_generate, write_qrels, write_synth
from .lexiprec import aggregate_preference, lexi_compare, sgn_lexiprecision
from .metrics import esl1, reciprocal_rank
from .model import LexiEvalError, PositionVector, position_vector
from .stats import UndefinedStatistic

FORMATS_HELP = """\
file formats:
  run    one row per retrieved document: <topic> <Q0> <doc> <rank> <score> <tag>
         documents are ordered by score descending, ties by document id
         descending (trec_eval convention) unless --trust-rank is given
  qrels  one row per judgment: <topic> <iter> <doc> <grade>
         grade >= --binarize-threshold means relevant
output:
  csv    a '# config: {...}' provenance line, a header row, then data rows
  json   one object with "config" and "results" keys
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _output_parent() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("output")
    g.add_argument("--format", choices=("csv", "json"), default=None,
                   help="report format (default depends on the subcommand)")
    g.add_argument("--out", default="-", help="output path, '-' for standard output (default)")
    g.add_argument("--precision", type=_positive_int, default=4, help="decimals for real values (default 4)")
    g.add_argument("--exact", action="store_true", help="print rational values exactly as n/d")
    g.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1,
                   help="worker threads (default: available CPUs); output does not depend on it")
    return p


def _data_parent() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("input")
    g.add_argument("--qrels", required=True, help="qrels file")
    g.add_argument("--binarize-threshold", type=_positive_int, default=1,
                   help="minimum grade counted as relevant (default 1)")
    g.add_argument("--trust-rank", action="store_true", help="order run rows by the rank column")
    g.add_argument("--depth", type=_positive_int, default=None, help="truncate runs to this depth")
    return p


def _runs_parent() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    p.add_argument("--runs", nargs="+", required=True, metavar="PATH",
                   help="run files and/or directories of run files")
    return p


def build_parser() -> argparse.ArgumentParser:
    out, data, runs = _output_parent(), _data_parent(), _runs_parent()
    parser = _Parser(prog="lexieval", description="Best-case ranking evaluation with lexicographic precision.",
                     epilog=FORMATS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", metavar="subcommand")
    sub.required = True

    def add(name: str, help_: str, parents: list) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_, description=help_, parents=parents, epilog=FORMATS_HELP,
                              formatter_class=argparse.RawDescriptionHelpFormatter)

    p = add("eval", "per-topic reciprocal rank, ESL1 and relevant positions for each run", [data, runs, out])

    p = add("compare", "per-topic lexiprecision preferences between two runs, and their mean", [data, out])
    p.add_argument("--run-a", required=True)
    p.add_argument("--run-b", required=True)
    p.add_argument("--scheme", choices=("rrlp", "sgnlp"), default="rrlp")

    p = add("census", "tie census, tie rate by recall level and the ECDF of the decisive level", [data, runs, out])
    p.add_argument("--max-level", type=_positive_int, default=20, help="deepest recall level for tie rates")

    p = add("agreement", "masked-prefix agreement and agreement under label/query removal", [data, runs, out])
    p.add_argument("--mode", choices=("prefix", "labels", "queries", "all"), default="all")
    p.add_argument("--fractions", type=_float_list, default=list(ex.DEFAULT_FRACTIONS),
                   help="comma-separated removal fractions in [0, 1)")
    p.add_argument("--samples", type=_positive_int, default=10, help="samples per fraction (default 10)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stratified", action="store_true", help="remove labels per topic rather than globally")

    p = add("degrade", "write a degraded qrels file (labels) or surviving topic list (queries)", [data, out])
    p.add_argument("--what", choices=("labels", "queries"), default="labels")
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stratified", action="store_true")

    p = add("significance", "discriminative power: percent of run pairs significantly different", [data, runs, out])
    p.add_argument("--test", choices=("hsd", "paired", "all"), default="all")
    p.add_argument("--scheme", choices=("rr", "rrlp", "sgnlp", "all"), default="all")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--pairs", action="store_true", help="also list every pair's statistic and p-value")

    p = add("backoff", "Pearson grid of delta RR_i across levels and regressions on following levels",
            [data, runs, out])
    p.add_argument("--max-level", type=_positive_int, default=8)
    p.add_argument("--horizon", type=_positive_int, default=4)
    p.add_argument("--targets", default="1,2,3,4", help="comma-separated target levels")

    p = add("theory", "closed-form tie probabilities, value-count ratios and exhaustive oracle checks", [out])
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--tie-prob", action="store_true", help="P(tie | r1) for r1 in [1, D-R+1]")
    mode.add_argument("--value-ratio", action="store_true", help="C(D,R+k)/C(D,R) for k in [0, K]")
    mode.add_argument("--check", action="store_true", help="run exhaustive oracle checks for D, R")
    p.add_argument("--corpus", type=_positive_int, required=True, help="corpus size D")
    p.add_argument("--relevant", type=_positive_int, required=True, help="number of relevant items R")
    p.add_argument("--k", type=int, default=None, help="largest k for --value-ratio (default D - R)")

    p = add("synth", "generate a synthetic benchmark (qrels.txt and runs/*.run)", [out])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--topics", type=_positive_int, default=50)
    p.add_argument("--relevant", type=_positive_int, default=10)
    p.add_argument("--run-depth", type=_positive_int, default=100)
    p.add_argument("--n-runs", type=_positive_int, default=10)
    p.add_argument("--quality", type=_float_list, default=[0.5],
                   help="one quality in [0, 1] or one per run, comma-separated")
    p.add_argument("--corpus", type=_positive_int, default=None)
    p.add_argument("--boost", type=float, default=20.0)
    p.add_argument("--dir", required=True, help="output directory")
    return parser


# ---------------------------------------------------------------------------
# rendering


class Renderer:
    def __init__(self, precision: int = 4, exact: bool = False) -> None:
        self.precision = precision
        self.exact = exact

    def value(self, v: Any) -> Any:
        if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
            return v
        if isinstance(v, Fraction):
            if self.exact:
                return str(v)
            v = float(v)
        if isinstance(v, float):
            if v != v or v in (float("inf"), float("-inf")):
                return str(v)
            return float(f"{v:.{self.precision}f}")
        return v

    def cell(self, v: Any) -> str:
        v = self.value(v)
        if v is None:
            return ""
        if isinstance(v, float):
            return f"{v:.{self.precision}f}"
        return str(v)

    def render(self, config: dict, rows: list[dict], fmt: str, extra: Optional[dict] = None) -> str:
        if fmt == "json":
            doc = {"config": config, "results": [{k: self.value(v) for k, v in r.items()} for r in rows]}
            for k, v in (extra or {}).items():
                doc[k] = self.value(v)
            return json.dumps(doc, indent=2, sort_keys=False) + "\n"
        columns: list[str] = []
        for r in rows:
            for k in r:
                if k not in columns:
                    columns.append(k)
        buf = io.StringIO()
        buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([self.cell(r.get(c)) for c in columns])
        for k, v in (extra or {}).items():
            buf.write(f"# {k}: {self.cell(v)}\n")
        return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


def _config(args, **extra) -> dict:
    skip = {"threads", "out", "format", "precision", "exact", "func"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    cfg.update(extra)
    return cfg


def _load(args):
    judgments = read_qrels(args.qrels, args.binarize_threshold)
    runs = read_runs(args.runs, trust_rank=args.trust_rank, depth=args.depth) if hasattr(args, "runs") else None
    return judgments, runs


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args, r: Renderer) -> str:
    judgments, runs = _load(args)
    rows = []
    for run in runs:
        for t in judgments.sorted_topics():
            pv = position_vector(run, judgments, t)
            rows.append({"run": run.run_tag, "topic": t, "numrel": pv.total_relevant,
                         "retrieved_relevant": pv.retrieved, "rr": reciprocal_rank(pv),
                         "esl1": esl1(pv), "positions": " ".join(map(str, pv.positions))})
    return r.render(_config(args), rows, args.format or "csv")


def cmd_compare(args, r: Renderer) -> str:
    judgments = read_qrels(args.qrels, args.binarize_threshold)
    a = read_run(args.run_a, trust_rank=args.trust_rank, depth=args.depth)
    b = read_run(args.run_b, trust_rank=args.trust_rank, depth=args.depth)
    topics = [t for t in judgments.sorted_topics() if judgments.numrel(t) > 0]
    rows, prefs = [], []
    for t in topics:
        p = lexi_compare(position_vector(a, judgments, t), position_vector(b, judgments, t))
        prefs.append(p)
        value = p.magnitude if args.scheme == "rrlp" else Fraction(p.sign)
        rows.append({"topic": t, "istar": p.istar, "sign": p.sign, "magnitude": value})
    if not prefs:
        raise LexiEvalError("no topic has a relevant document")
    mean = aggregate_preference(prefs, args.scheme)
    cfg = _config(args, run_a_tag=a.run_tag, run_b_tag=b.run_tag)
    fmt = args.format or "json"
    return r.render(cfg, rows, fmt, extra={"mean": mean})


def cmd_census(args, r: Renderer) -> str:
    judgments, runs = _load(args)
    bench = ex.Benchmark(runs, judgments)
    census = ex.tie_census(runs, judgments, args.max_level, args.threads, bench=bench)
    rows = census.rows()
    for lvl, count, cum in ex.istar_ecdf(runs, judgments, args.threads, bench=bench):
        rows.append({"table": "istar_ecdf", "key": lvl, "ties": None, "total": count, "value": cum})
    return r.render(_config(args), rows, args.format or "csv")


def cmd_agreement(args, r: Renderer) -> str:
    judgments, runs = _load(args)
    rows: list[dict] = []
    if args.mode in ("prefix", "all"):
        res = ex.masked_prefix_agreement(runs, judgments, args.threads)
        rows.append({"mode": "prefix", "fraction": None, "kind": "ranking", "method": "sgnlp_suffix",
                     "mean": res["sgnlp_agreement_pct"], "std": None, "samples": res["comparisons"]})
        rows.append({"mode": "prefix", "fraction": None, "kind": "ranking", "method": "drr2",
                     "mean": res["drr2_agreement_pct"], "std": None, "samples": res["comparisons"]})
    modes = [m for m in ("labels", "queries") if args.mode in (m, "all")]
    if modes:
        cfg = ex.ExperimentConfig(fractions=tuple(args.fractions), n_samples=args.samples, seed=args.seed,
                                  binarization_threshold=args.binarize_threshold, stratified=args.stratified)
        for m in modes:
            rows.extend(ex.agreement_under_degradation(runs, judgments, cfg, m, args.threads))
    return r.render(_config(args), rows, args.format or "csv")


def cmd_degrade(args, r: Renderer) -> str:
    judgments = read_qrels(args.qrels, args.binarize_threshold)
    if args.what == "labels":
        buf = io.StringIO()
        write_qrels(ex.degrade_labels(judgments, args.fraction, args.seed, args.stratified), buf)
        return buf.getvalue()
    return "".join(t + "\n" for t in ex.degrade_queries(judgments.topics, args.fraction, args.seed))


def cmd_significance(args, r: Renderer) -> str:
    judgments, runs = _load(args)
    bench = ex.Benchmark(runs, judgments)
    tests = ex.TESTS if args.test == "all" else (args.test,)
    methods = ("rrlp", "sgnlp", "rr") if args.scheme == "all" else (args.scheme,)
    rows = []
    pair_rows = []
    for test in tests:
        for method in methods:
            dp = ex.discriminative_power(runs, judgments, method, test, args.alpha, args.threads, bench=bench)
            rows.append({"table": "summary", "test": test, "method": method, "n_pairs": dp.n_pairs,
                         "n_significant": dp.n_significant, "percent": dp.percent})
            if args.pairs:
                for p in dp.pairs:
                    pair_rows.append({"table": "pairs", "test": test, "method": method, "run_a": p.a,
                                      "run_b": p.b, "mean_difference": p.mean_difference,
                                      "statistic": p.result.statistic, "p_value": p.result.p_value,
                                      "significant": p.significant})
    return r.render(_config(args), rows + pair_rows, args.format or "csv")


def cmd_backoff(args, r: Renderer) -> str:
    judgments, runs = _load(args)
    try:
        targets = [int(x) for x in args.targets.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--targets: expected integers, got {args.targets!r}") from None
    res = ex.backoff_analysis(runs, judgments, args.max_level, args.horizon, targets)
    return r.render(_config(args), res.rows(), args.format or "csv")


def cmd_theory(args, r: Renderer) -> str:
    D, R = args.corpus, args.relevant
    if R > D:
        raise UsageError("--relevant must not exceed --corpus")
    rows: list[dict] = []
    if args.tie_prob:
        rows = [{"D": D, "R": R, "r1": r1, "p_tie": p} for r1, p in theory.tie_curve(D, R)]
    elif args.value_ratio:
        kmax = D - R if args.k is None else args.k
        rows = [{"D": D, "R": R, "k": k, "ratio": theory.value_count_ratio(D, R, k)} for k in range(kmax + 1)]
    else:
        rows = _oracle_checks(D, R)
    return r.render(_config(args), rows, args.format or "csv")


def _oracle_checks(D: int, R: int) -> list[dict]:
    arr = [PositionVector(a, R, D) for a in theory.enumerate_arrangements(D, R)]
    tie_ok = all(theory.tie_probability(D, R, r1) == theory.tie_probability_by_enumeration(D, R, r1)
                 for r1 in range(1, D - R + 2))
    psych = [theory.psych_relevance_utilities(p) for p in arr] if R <= 10 else None
    agree = True
    for i, x in enumerate(arr):
        for j, y in enumerate(arr):
            s = sgn_lexiprecision(x, y)
            if theory.recall_level_preference(x, y) != s:
                agree = False
            if psych is not None:
                if theory.lex_sign(psych[i], psych[j]) != s:
                    agree = False
    return [
        {"check": "tie_probability_matches_enumeration", "D": D, "R": R, "passed": tie_ok},
        {"check": "oracles_agree_with_sgnlp", "D": D, "R": R, "passed": agree},
        {"check": "distinct_rr1_values", "D": D, "R": R,
         "passed": theory.distinct_rr1_values(D, R) == D - R + 1},
    ]


def cmd_synth(args, r: Renderer) -> str:
    quality = args.quality[0] if len(args.quality) == 1 else args.quality
    judgments, runs = synth_generate(args.topics, args.relevant, args.run_depth, args.n_runs, quality,
                                     args.seed, corpus_size=args.corpus, boost=args.boost)
    written = write_synth(judgments, runs, args.dir)
    rows = [{"file": str(p)} for p in written]
    return r.render(_config(args), rows, args.format or "csv")


COMMANDS = {
    "eval": cmd_eval,
    "compare": cmd_compare,
    "census": cmd_census,
    "agreement": cmd_agreement,
    "degrade": cmd_degrade,
    "significance": cmd_significance,
    "backoff": cmd_backoff,
    "theory": cmd_theory,
    "synth": cmd_synth,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    renderer = Renderer(args.precision, args.exact) if hasattr(args, "precision") else Renderer()
    try:
        text = COMMANDS[args.command](args, renderer)
        _emit(args, text)
    except UsageError as exc:
        sys.stderr.write(f"lexieval {args.command}: usage error: {exc}\n")
        return 1
    except (LexiEvalError, UndefinedStatistic, ValueError, OSError) as exc:
        sys.stderr.write(f"lexieval {args.command}: error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
