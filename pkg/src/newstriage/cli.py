"""Command-line entry points for batch operation.

Subcommands mirror the processing stages: ingest (filter + clean + group),
train, evaluate (cross-validation report), rank (scored queue CSV), curve
(recall@K and learning-curve CSVs) and serve (HTTP review service).

Exit codes: 0 success, 1 usage error, 2 data error. Errors print one
machine-parsable "error_code: message" line on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .corpus import (
    DatasetError,
    InsufficientClassSizeError,
    UnlabeledPostError,
    default_keywords,
    ensure_articles,
    filter_candidates,
    group_posts_by_article,
    load_dataset,
    load_keywords,
    preprocess,
    save_dataset,
)
from .evaluation import (
    cross_validate,
    learning_curve,
    recall_curve,
    write_learning_curve_csv,
    write_recall_curve_csv,
    write_report_csv,
)
from .experiment import TrainConfig, save_fitted, score_articles, train_text_model, trainable_posts
from .models import MODEL_KINDS
from .pipeline import rank_articles, write_queue_csv

log = logging.getLogger("newstriage")

DEFAULT_FRACTIONS = [0.2, 0.4, 0.6, 0.8, 1.0]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="newstriage", description="Suspicious-news triage pipeline")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, dataset_required=True):
        p.add_argument("--dataset", required=dataset_required, help="dataset JSONL path")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("ingest", help="filter candidate posts, clean comments, group by article")
    add_common(p)
    p.add_argument("--keywords", help="keyword file (default: packaged list)")

    p = sub.add_parser("train", help="train one model on the full labeled dataset")
    add_common(p)
    p.add_argument("--model", choices=MODEL_KINDS, default="lr")

    p = sub.add_parser("evaluate", help="stratified cross-validation report")
    add_common(p)
    p.add_argument("--model", choices=MODEL_KINDS, default="lr")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--level", choices=("post", "article"), default="post")

    p = sub.add_parser("rank", help="score articles and write the ranked queue")
    add_common(p)
    p.add_argument("--model", choices=MODEL_KINDS, default="lr")

    p = sub.add_parser("curve", help="recall@K and learning-curve CSVs")
    add_common(p)
    p.add_argument("--model", choices=MODEL_KINDS, default="lr")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--recall-mode", choices=("positives", "total"), default="positives")
    p.add_argument("--fractions", default=",".join(str(f) for f in DEFAULT_FRACTIONS))

    p = sub.add_parser("serve", help="run the review-queue HTTP service")
    add_common(p)
    p.add_argument("--keywords", help="keyword file (default: packaged list)")
    p.add_argument("--model", choices=MODEL_KINDS, default="lr")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", help="directory with the built review UI, served at /")
    return parser


def _configure_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("TRIAGE_LOG", "info").lower(), logging.INFO
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _keywords(args):
    return load_keywords(args.keywords) if getattr(args, "keywords", None) else default_keywords()


def _config(args) -> TrainConfig:
    return TrainConfig(kind=args.model, seed=args.seed)


def cmd_ingest(args) -> int:
    posts, _ = load_dataset(args.dataset)
    keywords = _keywords(args)
    candidates = filter_candidates(posts, keywords)
    cleaned = [preprocess(p) for p in candidates]
    articles = ensure_articles(cleaned, [])
    out = _outdir(args) / "dataset.jsonl"
    save_dataset(out, cleaned, articles)
    kept = [p for p in cleaned if not p.empty_after_preprocess]
    avg_chars = sum(len(p.comment_text) for p in kept) / len(kept) if kept else 0.0
    log.info(
        "ingest: %d posts in, %d candidates, %d articles, avg comment length %.1f chars -> %s",
        len(posts), len(candidates), len(articles), avg_chars, out,
    )
    return 0


def cmd_train(args) -> int:
    posts, _ = load_dataset(args.dataset)
    fitted = train_text_model(trainable_posts(posts), _config(args))
    out = _outdir(args) / "model.json"
    save_fitted(fitted, out)
    log.info("train: %s model saved to %s", args.model, out)
    return 0


def cmd_evaluate(args) -> int:
    posts, articles = load_dataset(args.dataset)
    if args.level == "article":
        articles = ensure_articles(posts, articles)
        result = cross_validate(_config(args), posts, articles=articles, k=args.folds, seed=args.seed, level="article")
    else:
        result = cross_validate(_config(args), posts, k=args.folds, seed=args.seed, level="post")
    out = _outdir(args) / "report.csv"
    write_report_csv(result, out)
    agg = result.aggregate
    log.info("evaluate: %s P=%.4f R=%.4f F1=%.4f -> %s", args.model, agg.precision, agg.recall, agg.f1, out)
    return 0


def cmd_rank(args) -> int:
    posts, articles = load_dataset(args.dataset)
    articles = ensure_articles(posts, articles)
    fitted = train_text_model(trainable_posts(posts), _config(args))
    _, scored = score_articles(fitted, posts, articles)
    queue = rank_articles(scored)
    out = _outdir(args) / "queue.csv"
    write_queue_csv(queue, out)
    log.info("rank: %d articles -> %s", len(queue), out)
    return 0


def cmd_curve(args) -> int:
    posts, articles = load_dataset(args.dataset)
    articles = ensure_articles(posts, articles)
    cfg = _config(args)
    outdir = _outdir(args)

    result = cross_validate(cfg, posts, articles=articles, k=args.folds, seed=args.seed, level="article")
    points = recall_curve(result.queue, result.gold_by_url, mode=args.recall_mode)
    recall_out = outdir / "recall_curve.csv"
    write_recall_curve_csv(points, recall_out)

    fractions = sorted(float(f) for f in args.fractions.split(",") if f)
    curve = learning_curve(cfg, posts, fractions, k=args.folds, seed=args.seed, level="post")
    learn_out = outdir / "learning_curve.csv"
    write_learning_curve_csv(curve, learn_out)
    log.info("curve: wrote %s and %s", recall_out, learn_out)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app
    from .service.core import TriageService

    feedback = _outdir(args) / "feedback.jsonl"
    service = TriageService(
        dataset_path=args.dataset,
        feedback_path=feedback,
        keywords=_keywords(args),
        config=_config(args),
    )
    app = create_app(service, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "rank": cmd_rank,
    "curve": cmd_curve,
    "serve": cmd_serve,
}


def run(argv=None) -> int:
    _configure_logging()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage_error: {exc}", file=sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage_error: {exc}", file=sys.stderr)
        return 1
    except DatasetError as exc:
        print(f"data_error: {exc}", file=sys.stderr)
        return 2
    except (UnlabeledPostError, InsufficientClassSizeError, ValueError) as exc:
        print(f"data_error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io_error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
