"""Operator command line.

Subcommands: normalize, score, score-sem, fit-weights, split, compare, serve.
Every command is deterministic given its inputs, config, and seed; utterance
order never affects a score. Flags can be defaulted through SEMWER_*
environment variables (e.g. SEMWER_BACKEND, SEMWER_WEIGHTS, SEMWER_SEED).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .backends import RemoteBackend, ScorerBackend, StubBackend
from .corpus import Etiology, load_manifest, mark_unshared, split_manifest
from .errors import EmptyResultError, SemwerError, UnbalancedMarkupError
from .jsonl import MalformedLineError, dump_line, iter_records
from .normalize import NormalizeOptions, ReferencePair, normalize, normalize_hypothesis
from .report import EvaluationReport, build_report, compare_metric_pairs
from .scoring import ReferenceEntry, check_id_alignment, score_batch
from .semantic import (
    ComponentScores,
    RatedComponents,
    RatedPair,
    ScorerWeights,
    batch_components,
    fit_weights,
)

ENV_PREFIX = "SEMWER_"


def _env_default(name: str, fallback=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), fallback)


def _open_out(path: str):
    if path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8")


def _load_weights(spec: str | None) -> ScorerWeights:
    if not spec:
        return ScorerWeights()
    if Path(spec).exists():
        data = json.loads(Path(spec).read_text(encoding="utf-8"))
        if "weights" in data:  # accept a fit-weights report as-is
            data = data["weights"]
        return ScorerWeights(
            alpha=float(data["alpha"]), beta=float(data["beta"]), gamma=float(data["gamma"])
        )
    parts = [float(x) for x in spec.split(",")]
    if len(parts) != 3:
        raise SemwerError(f"--weights needs three comma values or a JSON file, got {spec!r}")
    return ScorerWeights(*parts)


def _make_backend(spec: str, args: argparse.Namespace | None = None) -> ScorerBackend:
    if spec == "stub":
        return StubBackend()
    kwargs = {}
    if args is not None:
        kwargs = {
            "timeout": args.backend_timeout,
            "retries": args.backend_retries,
            "batch_size": args.backend_batch_size,
        }
    return RemoteBackend(spec, **kwargs)


# -- normalize ---------------------------------------------------------------

def cmd_normalize(args: argparse.Namespace) -> int:
    options = NormalizeOptions(
        verbalize=not args.no_verbalize,
        unknown_symbols=tuple(args.unknown_symbols.split(","))
        if args.unknown_symbols
        else NormalizeOptions().unknown_symbols,
    )
    failures = 0
    records_out = []
    with open(args.input, encoding="utf-8") as handle:
        try:
            rows = list(iter_records(handle))
        except MalformedLineError as exc:
            print(f"{args.input}:{exc.lineno}: {exc.reason}", file=sys.stderr)
            return 1
    for lineno, row in rows:
        try:
            raw = row["raw_transcript"]
        except KeyError:
            print(f"{args.input}:{lineno}: missing raw_transcript", file=sys.stderr)
            failures += 1
            continue
        try:
            pair = normalize(raw, options)
        except UnbalancedMarkupError as exc:
            print(
                f"{args.input}:{lineno}: unbalanced markup at column {exc.position}",
                file=sys.stderr,
            )
            failures += 1
            continue
        except EmptyResultError:
            print(
                f"{args.input}:{lineno}: normalized to zero tokens, excluded",
                file=sys.stderr,
            )
            continue  # flagged but not fatal: caller chose exclusion
        record = {
            "utterance_id": row.get("utterance_id"),
            "ref_with": list(pair.with_disfluencies),
            "ref_without": list(pair.without_disfluencies),
        }
        for key in ("speaker_id", "etiology"):
            if key in row:
                record[key] = row[key]
        records_out.append(record)
    out = _open_out(args.out)
    try:
        for record in records_out:
            out.write(dump_line(record) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 1 if failures else 0


# -- scoring -----------------------------------------------------------------

def _read_references(path: str) -> list[ReferenceEntry]:
    entries = []
    with open(path, encoding="utf-8") as handle:
        for lineno, row in iter_records(handle):
            try:
                entries.append(
                    ReferenceEntry(
                        utterance_id=str(row["utterance_id"]),
                        refs=ReferencePair(
                            tuple(row["ref_with"]), tuple(row["ref_without"])
                        ),
                        speaker_id=str(row.get("speaker_id", "")),
                        etiology=Etiology(row.get("etiology", "Unknown")),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedLineError(lineno, str(exc)) from exc
    return entries


def _read_hypotheses(path: str) -> dict[str, tuple[str, ...]]:
    hypotheses: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, row in iter_records(handle):
            if "utterance_id" not in row or "text" not in row:
                raise MalformedLineError(lineno, "record needs utterance_id and text")
            hypotheses[str(row["utterance_id"])] = normalize_hypothesis(str(row["text"]))
    return hypotheses


def _report_to_dict(report: EvaluationReport, weights: ScorerWeights, backend: str) -> dict:
    per_utterance = []
    for s in report.per_utterance:
        row = {
            "utterance_id": s.utterance_id,
            "speaker_id": s.speaker_id,
            "etiology": s.etiology.value,
            "wer": s.wer.wer,
            "wer_chosen_j": s.wer.chosen_j,
            "n_star": s.wer.n_star,
            "wer_by_ref": list(s.wer.wer_by_ref),
        }
        if s.sem is not None:
            row.update(
                semscore=s.sem.semscore,
                sem_chosen_j=s.sem.chosen_j,
                sem_by_ref=list(s.sem.sem_by_ref),
                components={
                    "nli": s.sem.components.nli,
                    "bert": s.sem.components.bert,
                    "soundex": s.sem.components.soundex,
                },
            )
        per_utterance.append(row)
    return {
        "corpus_wer": report.corpus_wer,
        "corpus_semscore": report.corpus_semscore,
        "total_n_star": report.total_n_star,
        "disfluency_preference": {
            metric: {"type1": p.type1, "type2": p.type2, "none": p.none}
            for metric, p in report.disfluency_preference.items()
        },
        "per_speaker_wer": report.per_speaker_wer,
        "per_etiology": {
            etiology: {"wer": wer, "semscore": sem}
            for etiology, (wer, sem) in report.per_etiology.items()
        },
        "speaker_wer_mean_std": list(report.speaker_wer_mean_std),
        "speaker_std_convention": report.speaker_std_convention,
        "weights": weights.__dict__,
        "backend": backend,
        "per_utterance": per_utterance,
    }


def _print_summary(report: EvaluationReport) -> None:
    print(f"corpus WER       : {report.corpus_wer * 100:.2f}%")
    if report.corpus_semscore is not None:
        print(f"corpus SemScore  : {report.corpus_semscore * 100:.2f}%")
    print(f"utterances       : {len(report.per_utterance)}")
    print(f"speakers         : {len(report.per_speaker_wer)}")
    mean, std = report.speaker_wer_mean_std
    print(f"speaker WER      : mean {mean * 100:.2f}% (std {std:.4f})")
    for metric, p in report.disfluency_preference.items():
        print(
            f"{metric:9s} prefers: with-disfluency {p.type1 * 100:.2f}%  "
            f"without {p.type2 * 100:.2f}%  none {p.none * 100:.2f}%"
        )
    for etiology, (wer, sem) in sorted(report.per_etiology.items()):
        sem_text = f"  SemScore {sem * 100:.2f}%" if sem is not None else ""
        print(f"  {etiology:8s}: WER {wer * 100:.2f}%{sem_text}")


def _run_score(args: argparse.Namespace, metrics: set[str], components: bool) -> int:
    weights = _load_weights(args.weights)
    references = _read_references(args.refs)
    hypotheses = _read_hypotheses(args.hyps)
    check_id_alignment([r.utterance_id for r in references], list(hypotheses))
    backend_spec = args.backend
    backend = _make_backend(backend_spec, args) if "sem" in metrics else None
    scored = score_batch(
        references, hypotheses, weights, backend, with_semscore="sem" in metrics
    )
    report = build_report(scored)
    payload = _report_to_dict(report, weights, backend_spec)
    if not components:
        for row in payload["per_utterance"]:
            row.pop("components", None)
    out = _open_out(args.out)
    try:
        json.dump(payload, out, indent=2)
        out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()
    if args.summary:
        _print_summary(report)
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    metrics = {m.strip() for m in args.metrics.split(",") if m.strip()}
    if not metrics <= {"wer", "sem"}:
        raise SemwerError(f"--metrics must be from wer,sem; got {args.metrics!r}")
    return _run_score(args, metrics, args.components)


def cmd_score_sem(args: argparse.Namespace) -> int:
    return _run_score(args, {"wer", "sem"}, args.components)


# -- weight fitting ------------------------------------------------------------

def cmd_fit_weights(args: argparse.Namespace) -> int:
    rows: list[RatedComponents] = []
    pending: list[RatedPair] = []
    with open(args.ratings, encoding="utf-8") as handle:
        for lineno, row in iter_records(handle):
            if "rating" not in row:
                raise MalformedLineError(lineno, "record needs a rating")
            rating = float(row["rating"])
            if {"nli", "bert", "soundex"} <= row.keys():
                rows.append(
                    RatedComponents(
                        ComponentScores(
                            float(row["nli"]), float(row["bert"]), float(row["soundex"])
                        ),
                        rating,
                    )
                )
            elif {"ref", "hyp"} <= row.keys():
                pending.append(
                    RatedPair(
                        hyp=normalize_hypothesis(str(row["hyp"])),
                        ref=normalize_hypothesis(str(row["ref"])),
                        rating=rating,
                    )
                )
            else:
                raise MalformedLineError(
                    lineno, "record needs nli/bert/soundex or ref/hyp"
                )
    if pending:
        backend = _make_backend(args.backend)
        scored = batch_components([(p.ref, p.hyp) for p in pending], backend)
        rows.extend(
            RatedComponents(components, pair.rating)
            for components, pair in zip(scored, pending)
        )

    result = fit_weights(rows, folds=args.folds, seed=args.seed)
    payload = {
        "weights": result.weights.__dict__,
        "cv": {
            "folds": result.folds,
            "seed": result.seed,
            "mse": list(result.fold_mse),
            "r2": list(result.fold_r2),
        },
        "n_samples": result.n_samples,
    }
    out = _open_out(args.out)
    try:
        json.dump(payload, out, indent=2)
        out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


# -- splits --------------------------------------------------------------------

def cmd_split(args: argparse.Namespace) -> int:
    with open(args.manifest, encoding="utf-8") as handle:
        manifest = load_manifest(handle)
    assignments = split_manifest(manifest, seed=args.seed)
    assignments = mark_unshared(manifest, assignments)
    out = _open_out(args.out)
    try:
        for record in manifest:
            assignment = assignments[record.utterance_id]
            out.write(
                dump_line(
                    {
                        "utterance_id": record.utterance_id,
                        "split": assignment.split.value,
                        "unshared": assignment.unshared,
                    }
                )
                + "\n"
            )
    finally:
        if out is not sys.stdout:
            out.close()

    if args.dataset_out:
        with open(args.dataset_out, "w", encoding="utf-8") as handle:
            for record in manifest:
                assignment = assignments[record.utterance_id]
                try:
                    pair = normalize(record.raw_transcript)
                except (EmptyResultError, UnbalancedMarkupError):
                    continue
                handle.write(
                    dump_line(
                        {
                            "utterance_id": record.utterance_id,
                            "speaker_id": record.speaker_id,
                            "etiology": record.etiology.value,
                            "split": assignment.split.value,
                            "unshared": assignment.unshared,
                            "ref_with": list(pair.with_disfluencies),
                            "ref_without": list(pair.without_disfluencies),
                        }
                    )
                    + "\n"
                )
    return 0


# -- system comparison -----------------------------------------------------------

def cmd_compare(args: argparse.Namespace) -> int:
    wers, semscores = [], []
    for path in args.reports:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        wers.append(float(data["corpus_wer"]))
        if data.get("corpus_semscore") is None:
            raise SemwerError(f"{path}: report has no corpus_semscore")
        semscores.append(float(data["corpus_semscore"]))

    comparison = compare_metric_pairs(wers, semscores)
    payload = {
        "systems": [
            {"report": path, "wer": w, "semscore": s, "rank_difference": d}
            for path, w, s, d in zip(
                args.reports, comparison.wers, comparison.semscores,
                comparison.rank_differences,
            )
        ],
        "pearson_wer_semscore": comparison.correlation,
    }
    out = _open_out(args.out)
    try:
        json.dump(payload, out, indent=2)
        out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()
    if args.csv_out:
        with open(args.csv_out, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["system", "wer", "semscore"])
            for path, w, s in zip(args.reports, comparison.wers, comparison.semscores):
                writer.writerow([path, w, s])
    return 0


# -- service ---------------------------------------------------------------------

def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ChallengeService, ServiceConfig, create_app

    config = ServiceConfig.load(args.config)
    if args.strict and config.scorer_backend != "stub":
        RemoteBackend(config.scorer_backend).health()
    service = ChallengeService(config)
    app = create_app(service)
    try:
        uvicorn.run(app, host=config.listen_host, port=config.listen_port)
    finally:
        service.close()
    return 0


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semwer",
        description="dual-reference WER and semantic scoring for ASR challenges",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="raw annotated transcripts to dual references")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=_env_default("out", "-"))
    p.add_argument("--no-verbalize", action="store_true")
    p.add_argument("--unknown-symbols", default=None, help="comma list, default xxx,<unk>,???")
    p.set_defaults(func=cmd_normalize)

    def add_score_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--refs", required=True)
        p.add_argument("--hyps", required=True)
        p.add_argument("--weights", default=_env_default("weights"))
        p.add_argument("--backend", default=_env_default("backend", "stub"))
        p.add_argument("--backend-timeout", type=float,
                       default=float(_env_default("backend_timeout", "30")))
        p.add_argument("--backend-retries", type=int,
                       default=int(_env_default("backend_retries", "2")))
        p.add_argument("--backend-batch-size", type=int,
                       default=int(_env_default("backend_batch_size", "32")))
        p.add_argument("--out", default=_env_default("out", "-"))
        p.add_argument("--summary", action="store_true", help="print a text table")

    p = sub.add_parser("score", help="score hypotheses with WER and SemScore")
    add_score_args(p)
    p.add_argument("--metrics", default="wer,sem")
    p.add_argument("--components", action="store_true",
                   help="include per-utterance component scores")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("score-sem", help="semantic scoring with component breakdown")
    add_score_args(p)
    p.add_argument("--components", action="store_true")
    p.set_defaults(func=cmd_score_sem)

    p = sub.add_parser("fit-weights", help="fit scorer weights from human ratings")
    p.add_argument("--ratings", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=int(_env_default("seed", "0")))
    p.add_argument("--backend", default=_env_default("backend", "stub"))
    p.add_argument("--out", default=_env_default("out", "-"))
    p.set_defaults(func=cmd_fit_weights)

    p = sub.add_parser("split", help="speaker-disjoint corpus split with unshared flags")
    p.add_argument("--manifest", required=True)
    p.add_argument("--seed", type=int, default=int(_env_default("seed", "0")))
    p.add_argument("--out", default=_env_default("out", "-"))
    p.add_argument("--dataset-out", default=None,
                   help="also write the joined challenge dataset for serving")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("compare", help="cross-system WER vs SemScore comparison")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out", default=_env_default("out", "-"))
    p.add_argument("--csv-out", default=None, help="CSV of (system, wer, semscore)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("serve", help="run the challenge evaluation service")
    p.add_argument("--config", required=True)
    p.add_argument("--strict", action="store_true",
                   help="fail at startup if the remote scorer is unreachable")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MalformedLineError as exc:
        print(f"error: line {exc.lineno}: {exc.reason}", file=sys.stderr)
        return 1
    except SemwerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
