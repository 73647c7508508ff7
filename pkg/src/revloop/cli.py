"""Command-line entry point.

Subcommands: serve (HTTP API), run (batch system-only revision), diff
(edit script between two files), ingest / split / stats (corpus handling),
metrics (acceptance tables), export (dataset), fixtures (bundled reference
logs). Outputs are deterministic functions of inputs and flags; pass
``--with-timestamps`` to ``run`` to stamp decisions with wall-clock time.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

from .diff import align_versions, extract_edits, markup
from .engine import (
    EPOCH_TS,
    BackendError,
    RemoteBackend,
    RuleBackend,
    heuristic_intention,
    run_system_only,
)
from .fixtures import install_reference_store
from .metrics import (
    acceptance_by_depth,
    acceptance_by_intention,
    corpus_stats,
    half_up,
)
from .model import (
    DomainTag,
    Mode,
    SessionConfig,
    canonical_dumps,
    edit_to_dict,
    session_to_dict,
)
from .segment import build_document
from .store import (
    EmptyCorpusError,
    NotFoundError,
    ParseError,
    SessionStore,
    StorageError,
    parse_corpus,
    split_corpus,
)


class CliError(Exception):
    """Fatal operator error: printed as one line on stderr, exit code 1."""


def _env(name: str, default: str | None = None) -> str | None:
    return os.environ.get(name, default)


def _make_backend(name: str, remote_url: str | None):
    if name == "rule":
        return RuleBackend()
    if name == "remote":
        if not remote_url:
            raise CliError("remote backend needs --remote-url or REVLOOP_REMOTE_URL")
        return RemoteBackend(remote_url)
    raise CliError(f"unknown backend {name!r} (choose rule or remote)")


def _doc_id_for_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _load_input_documents(path: str):
    """A corpus JSONL file yields every chain's original version; any other
    file is one document."""
    with open(path, encoding="utf-8") as fh:
        content = fh.read()
    if content.lstrip().startswith("{"):
        chains = parse_corpus(path)
        return [chain[0] for chain in chains]
    text = content.strip()
    if not text:
        raise CliError(f"{path} is empty")
    return [build_document(_doc_id_for_text(text), DomainTag.OTHER, text)]


def _print_table(headers: list[str], rows: list[list[str]], as_csv: bool):
    if as_csv:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(headers)
        writer.writerows(rows)
        sys.stdout.write(buf.getvalue())
        return
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    print("  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)))
    for row in rows:
        print("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))


def _fmt(value: float) -> str:
    return f"{half_up(value):.2f}"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    addr = args.addr or _env("REVLOOP_ADDR", "127.0.0.1:8000")
    host, _, port = addr.partition(":")
    store = SessionStore(args.store)
    backend_name = args.backend or _env("REVLOOP_BACKEND", "rule")
    backends = {"rule": RuleBackend()}
    remote_url = args.remote_url or _env("REVLOOP_REMOTE_URL")
    if remote_url:
        backends["remote"] = RemoteBackend(remote_url)
    if backend_name not in backends and backend_name != "replay":
        raise CliError(f"unknown backend {backend_name!r}")
    app = create_app(store, backends=backends, default_backend=backend_name,
                     default_t_max=args.t_max)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))
    return 0


def cmd_run(args) -> int:
    documents = _load_input_documents(args.input)
    remote_url = args.remote_url or _env("REVLOOP_REMOTE_URL")
    timestamp = (datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
                 if args.with_timestamps else EPOCH_TS)
    config = SessionConfig(mode=Mode.SYSTEM_ONLY, t_max=args.t_max,
                           backend_id=args.backend)

    def run_one(document):
        backend = _make_backend(args.backend, remote_url)
        return run_system_only(document, config, backend,
                               session_id=f"run-{document.doc_id}",
                               timestamp=timestamp)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            sessions = list(pool.map(run_one, documents))
    else:
        sessions = [run_one(d) for d in documents]
    sessions.sort(key=lambda s: s.original.doc_id)

    body = "\n".join(canonical_dumps(session_to_dict(s)) for s in sessions) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(body)
        summary = {"sessions": len(sessions), "out": args.out}
        print(canonical_dumps(summary) if args.json
              else f"wrote {len(sessions)} session(s) to {args.out}")
    else:
        sys.stdout.write(body)
    return 0


def cmd_diff(args) -> int:
    with open(args.before, encoding="utf-8") as fh:
        before_text = fh.read().strip()
    with open(args.after, encoding="utf-8") as fh:
        after_text = fh.read().strip()
    before = build_document(_doc_id_for_text(before_text), DomainTag.OTHER, before_text)
    after = build_document(_doc_id_for_text(after_text), DomainTag.OTHER, after_text)

    pairs = []
    for i, j in align_versions(before, after):
        if i is None or j is None:
            pairs.append((i, j, []))
            continue
        src = before.sentences[i]
        target = after.sentences[j].token_surfaces()
        if src.token_surfaces() == target:
            continue
        intention = heuristic_intention(src.token_surfaces(), target)
        pairs.append((i, j, extract_edits(src, target, intention)))

    if args.json:
        out = [{"before_index": i, "after_index": j,
                "edits": [edit_to_dict(e) for e in edits]}
               for i, j, edits in pairs]
        print(canonical_dumps({"pairs": out}))
        return 0
    for i, j, edits in pairs:
        if i is None:
            print(f"+ s{j}: {{+{after.sentence_text(j)}+}}")
        elif j is None:
            print(f"- s{i}: [-{before.sentence_text(i)}-]")
        else:
            print(f"~ s{i}->s{j}: {markup(before.sentences[i], edits)}")
            for e in edits:
                print(f"    [{e.intention.value}/{e.kind.value}] @{e.anchor} "
                      f"{list(e.old_tokens)} -> {list(e.new_tokens)}")
    return 0


def cmd_ingest(args) -> int:
    store = SessionStore(args.store)
    stats = store.ingest(args.corpus)
    if args.json:
        print(canonical_dumps({"n_docs": stats.n_docs, "avg_depth": stats.avg_depth,
                               "n_edits": stats.n_edits}))
    else:
        print(f"ingested {stats.n_docs} document(s), average depth "
              f"{_fmt(stats.avg_depth)}, {stats.n_edits} edited sentence pair(s)")
    return 0


def cmd_split(args) -> int:
    store = SessionStore(args.store)
    chains = store.load_chains()
    if not chains:
        raise CliError(f"no ingested corpus in {args.store}")
    try:
        parts = tuple(int(x) for x in args.ratios.split(":"))
    except ValueError:
        raise CliError(f"bad ratios {args.ratios!r}; expected like 8:1:1") from None
    if len(parts) != 3:
        raise CliError(f"bad ratios {args.ratios!r}; expected three numbers")
    result = split_corpus([c[0].doc_id for c in chains], parts, args.seed)
    if args.json:
        print(canonical_dumps(result))
    else:
        for name in ("train", "validation", "test"):
            print(f"{name} ({len(result[name])}): {' '.join(result[name])}")
    return 0


def cmd_stats(args) -> int:
    store = SessionStore(args.store)
    chains = store.load_chains()
    if not chains:
        raise CliError(f"no ingested corpus in {args.store}")
    stats = corpus_stats(chains)
    if args.json:
        print(canonical_dumps({"n_docs": stats.n_docs, "avg_depth": stats.avg_depth,
                               "n_edits": stats.n_edits}))
    else:
        _print_table(["# Docs", "Avg. Depths", "# Edits"],
                     [[str(stats.n_docs), _fmt(stats.avg_depth), str(stats.n_edits)]],
                     args.csv)
    return 0


def cmd_metrics(args) -> int:
    store = SessionStore(args.store)
    sessions = store.load_all_sessions()
    if args.group == "depth":
        rows_data = acceptance_by_depth(sessions)
        if args.json:
            print(canonical_dumps([{"depth": r.depth, "n_docs": r.n_docs,
                                    "avg_edits": r.avg_edits,
                                    "avg_accepts": r.avg_accepts,
                                    "pct_accepts": r.pct_accepts}
                                   for r in rows_data]))
            return 0
        rows = [[str(r.depth), str(r.n_docs), _fmt(r.avg_edits), _fmt(r.avg_accepts),
                 _fmt(r.pct_accepts) if r.pct_accepts is not None else "-"]
                for r in rows_data]
        _print_table(["t", "# Docs", "Avg. Edits", "Avg. Accepts", "% Accepts"],
                     rows, args.csv)
    else:
        rows_data = acceptance_by_intention(sessions)
        if args.json:
            print(canonical_dumps([{"intention": r.intention.value,
                                    "n_edits": r.n_edits, "n_accepts": r.n_accepts,
                                    "pct_accepts": r.pct_accepts}
                                   for r in rows_data]))
            return 0
        rows = [[r.intention.value, str(r.n_edits), str(r.n_accepts),
                 _fmt(r.pct_accepts) if r.pct_accepts is not None else "-"]
                for r in rows_data]
        _print_table(["Intention", "# Edits", "# Accepts", "% Accepts"],
                     rows, args.csv)
    return 0


def cmd_export(args) -> int:
    store = SessionStore(args.store)
    path = store.export_dataset()
    if args.out and os.path.abspath(args.out) != os.path.abspath(str(path)):
        with open(path, encoding="utf-8") as src, \
                open(args.out, "w", encoding="utf-8") as dst:
            dst.write(src.read())
        path = args.out
    n = sum(1 for _ in open(path, encoding="utf-8"))
    if args.json:
        print(canonical_dumps({"records": n, "out": str(path)}))
    else:
        print(f"exported {n} record(s) to {path}")
    return 0


def cmd_fixtures(args) -> int:
    from . import fixtures as fx

    store = SessionStore(args.store)
    if args.set == "depth":
        sessions = fx.reference_depth_sessions()
    elif args.set == "intention":
        sessions = fx.reference_intention_sessions()
    else:
        sessions = None
    if sessions is None:
        count = install_reference_store(store)
    else:
        for s in sessions:
            store.save_session(s)
            for step in s.steps:
                if step.decisions:
                    store.append_decisions(s.session_id, step.depth, step.decisions)
        count = len(sessions)
    if args.json:
        print(canonical_dumps({"sessions": count, "store": args.store}))
    else:
        print(f"installed {count} reference session(s) in {args.store}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="revloop",
                                     description="iterative text revision toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_store(p):
        p.add_argument("--store", default=_env("REVLOOP_STORE", "store"),
                       help="store directory (default: store or $REVLOOP_STORE)")

    def add_json(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")

    def add_csv(p):
        p.add_argument("--csv", action="store_true", help="CSV table output")

    p = sub.add_parser("serve", help="run the HTTP API")
    add_store(p)
    p.add_argument("--addr", default=None, help="HOST:PORT (default 127.0.0.1:8000)")
    p.add_argument("--backend", default=None, choices=["rule", "remote", "replay"])
    p.add_argument("--remote-url", default=None)
    p.add_argument("--t-max", dest="t_max", type=int,
                   default=int(_env("REVLOOP_T_MAX", "3")))
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("run", help="batch system-only revision")
    p.add_argument("--input", required=True, help="text file or corpus JSONL")
    p.add_argument("--mode", default="system-only", choices=["system-only"])
    p.add_argument("--backend", default="rule", choices=["rule", "remote"])
    p.add_argument("--remote-url", default=None)
    p.add_argument("--t-max", dest="t_max", type=int, default=3)
    p.add_argument("--out", default=None, help="write sessions JSONL here")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--with-timestamps", action="store_true",
                   help="stamp decisions with wall-clock time")
    add_json(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("diff", help="edit script between two text files")
    p.add_argument("--before", required=True)
    p.add_argument("--after", required=True)
    add_json(p)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("ingest", help="load a version-chain corpus into the store")
    p.add_argument("--corpus", required=True)
    add_store(p)
    add_json(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="partition ingested documents by id")
    add_store(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratios", default="8:1:1")
    add_json(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("stats", help="corpus statistics")
    add_store(p)
    add_json(p)
    add_csv(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("metrics", help="acceptance tables from stored sessions")
    add_store(p)
    p.add_argument("--group", default="depth", choices=["depth", "intention"])
    add_json(p)
    add_csv(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("export", help="write the revision dataset")
    add_store(p)
    p.add_argument("--out", default=None)
    add_json(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("fixtures", help="install bundled reference sessions")
    add_store(p)
    p.add_argument("--set", default="all", choices=["depth", "intention", "all"])
    add_json(p)
    p.set_defaults(func=cmd_fixtures)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ParseError, EmptyCorpusError, NotFoundError, StorageError,
            BackendError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
