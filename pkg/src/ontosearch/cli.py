"""Command-line front end: ``ontosearch {index,expand,search,eval,repl}``.

Exit status is 0 on success, 1 on a usage error and 2 on a data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

from .evaluation import (
    DEFAULT_PERMUTATIONS,
    Comparison,
    EvaluationError,
    compare,
    dumps,
    evaluate_run,
    format_comparison,
    format_report,
    format_run_lines,
    read_qrels,
    read_run,
)
from .knowledge_base import KnowledgeBaseError
from .pipeline import STRATEGIES, SemanticSearch
from .retrieval import CorpusError, InvertedIndex, build_index, read_corpus
from .text import read_stopwords

USAGE_ERROR = 1
DATA_ERROR = 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    kb_dir: str | None = None
    phrases: str | None = None
    class_lexicon: str | None = None
    stopwords: str | None = None
    corpus: str | None = None
    index: str | None = None
    qrels: str | None = None
    strategy: str = "rcsa"
    k: int = 1000
    permutations: int = DEFAULT_PERMUTATIONS
    seed: int = 0

    def validate(self):
        if self.strategy not in STRATEGIES:
            raise UsageError(f"strategy must be one of {', '.join(STRATEGIES)}")
        if self.k < 1:
            raise UsageError("--k must be >= 1")
        if self.permutations < 1:
            raise UsageError("--permutations must be >= 1")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with RunConfig keys; flags override it")
    p.add_argument("--kb-dir", help="directory holding classes/entities/relations/facts .tsv")
    p.add_argument("--phrases", help="relation phrase dictionary (default: <kb-dir>/phrases.tsv)")
    p.add_argument("--class-lexicon", help="class word rules (default: <kb-dir>/class_lexicon.tsv)")
    p.add_argument("--stopwords", help="stopword list, one token per line")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ontosearch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("index", help="index a JSON-lines corpus")
    _common(p)
    p.add_argument("--corpus")
    p.add_argument("--out", "--index", dest="index", help="where to write the index")

    p = sub.add_parser("expand", help="show how a query is expanded")
    _common(p)
    p.add_argument("query")
    p.add_argument("--strategy", choices=STRATEGIES)
    p.add_argument("--explain", action="store_true", help="print patterns and activation trace")
    p.add_argument("--max-added", type=int, help="cap on entities added to the query")

    p = sub.add_parser("search", help="rank documents for one query or a query file")
    _common(p)
    p.add_argument("query", nargs="?")
    p.add_argument("--queries", help="TSV of query_id<TAB>text; writes a TREC run for all of them")
    p.add_argument("--corpus", help="corpus to index on the fly when --index is not given")
    p.add_argument("--index")
    p.add_argument("--strategy", choices=STRATEGIES)
    p.add_argument("--k", type=int)
    p.add_argument("--max-added", type=int)
    p.add_argument("--run-tag")

    p = sub.add_parser("eval", help="evaluate a run, or compare two runs")
    _common(p)
    p.add_argument("run_a")
    p.add_argument("run_b", nargs="?")
    p.add_argument("--qrels")
    p.add_argument("--permutations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--exhaustive", action="store_true", help="enumerate all sign flips (<= 20 queries)")

    p = sub.add_parser("repl", help="read queries from stdin, print expansion and top hits")
    _common(p)
    p.add_argument("--corpus")
    p.add_argument("--index")
    p.add_argument("--strategy", choices=STRATEGIES)
    p.add_argument("--k", type=int)
    p.add_argument("--max-added", type=int)
    return parser


def make_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for k, v in data.items():
            setattr(cfg, k, v)
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            setattr(cfg, f.name, v)
    cfg.validate()
    return cfg


def _fixture(name: str) -> str:
    return str(resources.files("ontosearch") / "data" / "fixture" / name)


def _engine(cfg: RunConfig, index: InvertedIndex | None = None) -> SemanticSearch:
    kb_dir = cfg.kb_dir or _fixture("")
    return SemanticSearch.from_dir(kb_dir, cfg.phrases, cfg.class_lexicon, cfg.stopwords, index)


def _stopwords(cfg):
    return read_stopwords(cfg.stopwords) if cfg.stopwords else None


def _load_index(cfg: RunConfig) -> InvertedIndex:
    if cfg.index:
        return InvertedIndex.load(cfg.index)
    return build_index(read_corpus(cfg.corpus or _fixture("corpus.jsonl")), _stopwords(cfg))


def cmd_index(args, cfg: RunConfig, out) -> int:
    index = build_index(read_corpus(cfg.corpus or _fixture("corpus.jsonl")), _stopwords(cfg))
    if cfg.index:
        index.save(cfg.index)
    if args.json:
        print(dumps({"N": index.n_docs, "vocabulary": len(index.postings), "out": cfg.index}), file=out)
    else:
        print(f"N={index.n_docs} vocabulary={len(index.postings)}", file=out)
    return 0


def cmd_expand(args, cfg: RunConfig, out) -> int:
    engine = _engine(cfg)
    exp = engine.expand(args.query, cfg.strategy, args.max_added)
    if args.json:
        payload = {
            "query": args.query,
            "strategy": cfg.strategy,
            "original": list(exp.query.original_terms),
            "added": list(exp.query.added_terms),
            "patterns": [str(p) for p in exp.analysis.patterns],
            "activated": sorted(exp.activation.activated) if exp.activation else [],
        }
        if args.explain:
            payload["trace"] = [t.to_line().split("\t") for t in (exp.activation.trace if exp.activation else [])]
            payload["analysis"] = exp.analysis.trace
        print(dumps(payload), file=out)
        return 0
    print(f"original: {' '.join(exp.query.original_terms)}", file=out)
    print(f"added: {' '.join(exp.query.added_terms) or '(none)'}", file=out)
    print(f"query: {exp.query}", file=out)
    if args.explain:
        for p in exp.analysis.patterns:
            print(f"pattern: {p}", file=out)
        for line in exp.analysis.trace:
            print(f"analysis: {line}", file=out)
        if exp.activation is not None:
            for t in sorted(exp.activation.trace, key=lambda t: (t.entity, t.source)):
                check = ""
                if t.strategy == "r-csa":
                    cls = engine.kb.class_of(t.entity)
                    check = f"\tclass {cls}"
                print(f"trace: {t.to_line()}{check}", file=out)
    return 0


def _read_queries(path) -> list[tuple[str, str]]:
    rows = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip() or line.startswith("# "):
                    continue
                qid, sep, text = line.partition("\t")
                if not sep or not qid.strip():
                    raise CorpusError(f"{path}:{lineno}: expected query_id<TAB>text")
                rows.append((qid.strip(), text.strip()))
    except OSError as exc:
        raise CorpusError(f"cannot read queries {path}: {exc}") from None
    return rows


def cmd_search(args, cfg: RunConfig, out) -> int:
    if bool(args.query) == bool(args.queries):
        raise UsageError("give either a query or --queries")
    engine = _engine(cfg, _load_index(cfg))
    tag = args.run_tag or cfg.strategy
    queries = _read_queries(args.queries) if args.queries else [("q1", args.query)]
    for qid, text in queries:
        hits = engine.search(text, cfg.strategy, cfg.k, args.max_added)
        for line in format_run_lines(qid, hits, tag):
            print(line, file=out)
    return 0


def cmd_eval(args, cfg: RunConfig, out) -> int:
    qrels = read_qrels(cfg.qrels or _fixture("qrels.txt"))
    report_a = evaluate_run(read_run(args.run_a), qrels, Path(args.run_a).stem)
    payload = {"a": report_a.to_dict()}
    text = [format_report(report_a)]
    if args.run_b:
        report_b = evaluate_run(read_run(args.run_b), qrels, Path(args.run_b).stem)
        comp = compare(report_a, report_b, cfg.permutations, cfg.seed, args.exhaustive)
        # round-trip guards the reported p against its own counts
        Comparison.from_dict(json.loads(json.dumps(comp.to_dict())))
        payload["b"] = report_b.to_dict()
        payload["comparison"] = comp.to_dict()
        text += ["", format_report(report_b), "", format_comparison(comp)]
    print(dumps(payload) if args.json else "\n".join(text), file=out)
    return 0


def cmd_repl(args, cfg: RunConfig, out, stdin=None) -> int:
    engine = _engine(cfg, _load_index(cfg))
    stdin = stdin or sys.stdin
    k = min(cfg.k, 10) if args.k is None else cfg.k
    for line in stdin:
        text = line.strip()
        if not text:
            continue
        exp = engine.expand(text, cfg.strategy, args.max_added)
        print(f"query: {exp.query}", file=out)
        for i, hit in enumerate(engine.search(text, cfg.strategy, k, args.max_added), 1):
            print(f"  {i:>2}. {hit.doc_id}  {hit.score:.4f}", file=out)
    return 0


COMMANDS = {"index": cmd_index, "expand": cmd_expand, "search": cmd_search, "eval": cmd_eval, "repl": cmd_repl}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        return COMMANDS[args.command](args, cfg, out)
    except UsageError as exc:
        print(f"ontosearch: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (KnowledgeBaseError, CorpusError, EvaluationError, OSError, ValueError) as exc:
        print(f"ontosearch: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
