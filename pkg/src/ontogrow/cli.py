"""Command-line interface: tree building, extraction, interactive and
scripted insertion, both evaluation protocols, and the HTTP service."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from importlib import resources
from pathlib import Path

from . import insertion
from .engine import Engine
from .extraction import extract_concepts, run_recognition_eval
from .insertion import Answer, OracleUser, run_with_oracle
from .nlu import (
    LocalNluProvider,
    load_category_rules,
    load_entity_lexicon,
    load_tagged_corpus,
    train_intents,
)
from .ontology import load_ontology
from .stats import compute_metrics, run_insertion_eval, step_table_csv, wilcoxon_table_csv
from .tree import build_tree, dump_tree_text


def _data_path(name: str) -> Path:
    return Path(str(resources.files("ontogrow").joinpath("data", name)))


def _load_ontology(path: str):
    return load_ontology(Path(path).read_text(encoding="utf-8"))


def _build_provider(args) -> LocalNluProvider:
    corpus_path = Path(args.intent_corpus) if args.intent_corpus else _data_path("intent_corpus.jsonl")
    lexicon_path = Path(args.entity_lexicon) if args.entity_lexicon else _data_path("entity_lexicon.json")
    rules_path = Path(args.category_rules) if args.category_rules else _data_path("category_rules.json")
    model = train_intents(load_tagged_corpus(corpus_path.read_text(encoding="utf-8")))
    return LocalNluProvider(
        model=model,
        entity_lexicon=load_entity_lexicon(lexicon_path.read_text(encoding="utf-8")),
        category_rules=load_category_rules(rules_path.read_text(encoding="utf-8")),
    )


def _add_lexicon_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--intent-corpus", help="tagged training corpus (JSONL)")
    parser.add_argument("--entity-lexicon", help="entity lexicon (JSON word->type)")
    parser.add_argument("--category-rules", help="category rules (JSON)")


def cmd_build_tree(args) -> int:
    onto = _load_ontology(args.ontology)
    text = dump_tree_text(build_tree(onto))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"tree dump written to {args.out}")
    else:
        print(text, end="")
    return 0


def cmd_extract(args) -> int:
    onto = _load_ontology(args.ontology)
    provider = _build_provider(args)
    report = []
    for line in Path(args.corpus).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        result = extract_concepts(line, provider, onto)
        report.append(
            {
                "reply": line,
                "best": result.best.lemma if result.best else None,
                "candidates": [
                    {"text": c.text, "lemma": c.lemma, "entity_type": c.entity_type}
                    for c in result.candidates
                ],
            }
        )
    text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
        print(f"extraction report written to {args.report}")
    else:
        print(text, end="")
    return 0


def cmd_insert(args) -> int:
    onto = _load_ontology(args.ontology)
    tree = build_tree(onto)
    provider = _build_provider(args)
    if args.oracle:
        scripts = json.loads(Path(args.oracle).read_text(encoding="utf-8"))
        target = args.target or scripts.get("targets", {}).get(args.concept)
        if not target:
            print("error: --target or a targets entry in the script file is required", file=sys.stderr)
            return 2
        oracle = OracleUser(
            target_parent=target,
            definitions=scripts.get("definitions", {}),
            sentences=scripts.get("sentences", {}),
        )
        run = run_with_oracle(
            args.concept, args.method, oracle, onto, tree, provider, entity_type=args.entity_type
        )
        print(f"inserted: {run.inserted} in {run.steps} steps "
              f"({run.steps_per_inserted:g} per concept)")
        session = run.session
    elif args.interactive:
        session, question = insertion.start_session(
            args.concept, args.method, {"entity_type": args.entity_type}, onto, tree
        )
        while session.outcome == "pending" and question is not None:
            print(question.text)
            raw = input("> ").strip()
            try:
                session, question = insertion.answer(
                    session, Answer.from_user_text(raw), onto, tree, provider
                )
            except Exception as exc:  # keep the session alive on bad input
                print(f"({exc})")
                question = session.pending
        print(f"outcome: {session.outcome}; inserted: {session.inserted}; steps: {session.steps}")
    else:
        print("error: choose --oracle SCRIPTS or --interactive", file=sys.stderr)
        return 2
    if args.transcript:
        Path(args.transcript).write_text(insertion.transcript_text(session), encoding="utf-8")
        print(f"transcript written to {args.transcript}")
    return 0


def cmd_eval_recognition(args) -> int:
    onto = _load_ontology(args.ontology)
    provider = _build_provider(args)
    corpus = load_tagged_corpus(Path(args.corpus).read_text(encoding="utf-8"))
    report = run_recognition_eval(corpus, provider, onto)
    metrics = compute_metrics(report.matrix)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "recognition_report.json"
    report_path.write_text(
        json.dumps(report.to_dict() | {"metrics": metrics.to_dict()}, indent=2) + "\n",
        encoding="utf-8",
    )
    from .figures import render_confusion_matrix

    figure_path = render_confusion_matrix(report.matrix, metrics, out_dir / "confusion_matrix.png")
    counts = report.matrix
    print(f"TP={counts.tp} FP={counts.fp} FN={counts.fn} TN={counts.tn}")
    for name, value in metrics.to_dict().items():
        print(f"{name}: " + ("undefined" if value is None else f"{value:.3f}"))
    print(f"report: {report_path}\nfigure: {figure_path}")
    return 0


def cmd_eval_insertion(args) -> int:
    onto = _load_ontology(args.ontology)
    provider = _build_provider(args)
    nouns = []
    with open(args.nouns, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            nouns.append((row["noun"], row["target_parent"], row["entity_type"]))
    scripts = json.loads(Path(args.scripts).read_text(encoding="utf-8"))
    report = run_insertion_eval(nouns, onto, scripts, provider)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    steps_path = out_dir / "step_table.csv"
    steps_path.write_text(step_table_csv(report.records), encoding="utf-8")
    wilcoxon_path = out_dir / "wilcoxon_table.csv"
    wilcoxon_path.write_text(wilcoxon_table_csv(report), encoding="utf-8")
    summary_path = out_dir / "insertion_summary.json"
    summary_path.write_text(
        json.dumps(
            {
                "averages": {
                    cohort: {f"m{m}": v for m, v in averages.items()}
                    for cohort, averages in report.averages.items()
                },
                "wilcoxon": {
                    cohort: {f"m{a}-m{b}": res.to_dict() for (a, b), res in tests.items()}
                    for cohort, tests in report.wilcoxon.items()
                },
                "note": "normality not assumed; Wilcoxon signed-rank used throughout",
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    from .figures import render_step_comparison

    figure_path = render_step_comparison(report, out_dir / "step_comparison.png")
    for cohort, averages in report.averages.items():
        line = "  ".join(f"M{m}={v:.2f}" for m, v in averages.items())
        print(f"{cohort}: {line}")
    print("note: normality not assumed; Wilcoxon signed-rank used throughout")
    print(
        f"step table: {steps_path}\nwilcoxon table: {wilcoxon_path}\n"
        f"summary: {summary_path}\nfigure: {figure_path}"
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    problems = []
    for label, value in [
        ("ontology", args.ontology),
        ("intent corpus", args.intent_corpus),
        ("entity lexicon", args.entity_lexicon),
        ("category rules", args.category_rules),
    ]:
        if value and not Path(value).is_file():
            problems.append(f"config error: {label} file not found: {value}")
    if not 0 < args.port < 65536:
        problems.append(f"config error: port out of range: {args.port}")
    if problems:
        for problem in problems:
            print(problem, file=sys.stderr)
        return 2

    onto = _load_ontology(args.ontology)
    provider = _build_provider(args)
    engine = Engine(
        onto,
        provider,
        method_policy=args.method,
        journal_path=args.journal,
    )
    app = create_app(engine)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="ontogrow")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-tree", help="build the dialogue tree and dump it")
    p.add_argument("ontology")
    p.add_argument("--out")
    p.set_defaults(func=cmd_build_tree)

    p = sub.add_parser("extract", help="extract candidate concepts from replies")
    p.add_argument("ontology")
    p.add_argument("corpus", help="plain text, one reply per line")
    p.add_argument("--report")
    _add_lexicon_options(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("insert", help="run one insertion session")
    p.add_argument("ontology")
    p.add_argument("concept")
    p.add_argument("--method", type=int, required=True, choices=(1, 2, 3, 4))
    p.add_argument("--oracle", help="scripts JSON (targets/definitions/sentences)")
    p.add_argument("--target", help="target parent class (overrides the script file)")
    p.add_argument("--entity-type")
    p.add_argument("--interactive", action="store_true")
    p.add_argument("--transcript", help="write the transcript file here")
    _add_lexicon_options(p)
    p.set_defaults(func=cmd_insert)

    p = sub.add_parser("eval-recognition", help="confusion-matrix evaluation")
    p.add_argument("ontology")
    p.add_argument("corpus", help="tagged corpus (JSONL)")
    p.add_argument("--out-dir", default="eval_out")
    _add_lexicon_options(p)
    p.set_defaults(func=cmd_eval_recognition)

    p = sub.add_parser("eval-insertion", help="step-count comparison of the four methods")
    p.add_argument("ontology")
    p.add_argument("nouns", help="CSV with columns noun,target_parent,entity_type")
    p.add_argument("scripts", help="scripts JSON (definitions/sentences)")
    p.add_argument("--out-dir", default="eval_out")
    _add_lexicon_options(p)
    p.set_defaults(func=cmd_eval_insertion)

    p = sub.add_parser("serve", help="run the HTTP session API")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ontology", required=True)
    p.add_argument("--method", type=int, default=3, choices=(1, 2, 3, 4))
    p.add_argument("--journal", help="append-only transcript journal (JSONL)")
    _add_lexicon_options(p)
    p.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
