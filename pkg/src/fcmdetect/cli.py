"""Command-line interface.

Subcommands
-----------
train       clean a labeled dataset, fit both class models, save a bundle
classify    label texts from a file or stdin, JSONL decisions on stdout
evaluate    score a labeled file against a bundle, write report artifacts
experiment  parameter sweeps, learning curves and a throughput benchmark
serve       expose a bundle over HTTP

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path
from typing import Sequence

from fcmdetect import __version__
from fcmdetect.alphabet import Alphabet, AlphabetError, custom_alphabet, preset_alphabet
from fcmdetect.classifier import BinaryClassifier, Decision
from fcmdetect.dataset import (
    DatasetError,
    DatasetSplit,
    LabeledSample,
    build_reference,
    load_dataset,
    preprocess,
    split,
)
from fcmdetect.experiments import (
    REF_LENGTH_CSV,
    TARGET_PREFIX_CSV,
    ExperimentError,
    alphabet_trim_study,
    grid_search,
    reference_length_curve,
    save_curve,
    save_grid_search,
    save_throughput,
    save_trim_study,
    target_prefix_curve,
    throughput_bench,
)
from fcmdetect.metrics import save_confusion_csv, save_report_json, score
from fcmdetect.persistence import load_bundle, save_bundle

OUT_ENV = "FCMDETECT_OUT"


# ----------------------------------------------------------------------
# flag parsing helpers


def _parse_alphabet(value: str) -> Alphabet:
    if value.startswith("custom:"):
        return custom_alphabet(value[len("custom:") :])
    return preset_alphabet(value)


def _parse_ratios(value: str) -> tuple[float, float, float]:
    parts = value.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated ratios, got {value!r}")
    try:
        r = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"ratios must be numbers, got {value!r}") from None
    return r  # validated further by split()


def _parse_int_list(value: str) -> list[int]:
    """Accept '3..10' ranges and '3,5,7' lists."""
    try:
        if ".." in value:
            lo, hi = value.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise ValueError
            return list(range(lo_i, hi_i + 1))
        return [int(p) for p in value.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected an integer list like '3,5,7' or a range like '3..10', got {value!r}"
        ) from None


def _parse_float_list(value: str) -> list[float]:
    try:
        return [float(p) for p in value.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {value!r}") from None


def _parse_label_map(value: str) -> dict[str, str]:
    """Accept JSON ({"raw": "canonical"}) or 'raw=canonical,raw2=canonical2'."""
    if value.lstrip().startswith("{"):
        try:
            mapping = json.loads(value)
        except json.JSONDecodeError as exc:
            raise argparse.ArgumentTypeError(f"label map is not valid JSON: {exc}") from None
        if not isinstance(mapping, dict):
            raise argparse.ArgumentTypeError("label map JSON must be an object")
        return {str(k): str(v) for k, v in mapping.items()}
    mapping = {}
    for pair in value.split(","):
        if "=" not in pair:
            raise argparse.ArgumentTypeError(f"bad label-map entry {pair!r}, expected raw=canonical")
        raw, canon = pair.split("=", 1)
        mapping[raw.strip()] = canon.strip()
    return mapping


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="labeled dataset file (CSV or JSONL)")
    p.add_argument("--format", choices=["csv", "jsonl"], help="override format inference")
    p.add_argument("--text-field", default="text", help="field holding the text")
    p.add_argument("--label-field", default="label", help="field holding the class label")
    p.add_argument(
        "--label-map",
        type=_parse_label_map,
        help="raw-to-canonical label mapping, JSON or raw=canonical pairs",
    )
    p.add_argument("--delimiter", default=",", help="CSV delimiter")


def _add_pipeline_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alphabet", default="sigma2", help="preset name or custom:<chars>")
    p.add_argument("--k", type=int, default=8, help="context order")
    p.add_argument("--alpha", type=float, default=0.5, help="smoothing constant")
    p.add_argument("--seed", type=int, default=42, help="split shuffle seed")
    p.add_argument("--ratios", type=_parse_ratios, default=(0.8, 0.1, 0.1), help="train,val,test")
    p.add_argument("--min-chars", type=int, default=50, help="drop samples filtering shorter than this")
    p.add_argument("--no-balance", action="store_true", help="skip character balancing")
    p.add_argument("--no-lowercase", action="store_true", help="keep case before filtering")


def _add_out_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--out",
        default=None,
        help=f"output directory (default: ${OUT_ENV} or current directory)",
    )


def _out_dir(args: argparse.Namespace) -> Path:
    out = args.out or os.environ.get(OUT_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _prepare_split(args: argparse.Namespace, alphabet: Alphabet) -> tuple[DatasetSplit, dict]:
    """Load, clean and split per the shared pipeline flags."""
    samples, load_report = load_dataset(
        args.data,
        format=args.format,
        text_field=args.text_field,
        label_field=args.label_field,
        label_map=args.label_map,
        delimiter=args.delimiter,
    )
    cleaned, prep_report = preprocess(
        samples,
        alphabet=alphabet,
        lowercase=not args.no_lowercase,
        min_chars=args.min_chars,
        balance=not args.no_balance,
    )
    parts = split(cleaned, seed=args.seed, ratios=args.ratios)
    reports = {
        "load_report": load_report.to_dict(),
        "preprocess_report": prep_report.to_dict(),
        "partition_sizes": {
            "train": len(parts.train),
            "validation": len(parts.validation),
            "test": len(parts.test),
        },
    }
    return parts, reports


def _pipeline_params(args: argparse.Namespace) -> dict:
    return {
        "data": str(args.data),
        "data_sha256": _sha256(args.data),
        "alphabet": args.alphabet,
        "seed": args.seed,
        "ratios": list(args.ratios),
        "min_chars": args.min_chars,
        "balance": not args.no_balance,
        "lowercase": not args.no_lowercase,
    }


def _train_classifier(
    parts: DatasetSplit, alphabet: Alphabet, k: int, alpha: float, lowercase: bool
) -> tuple[BinaryClassifier, dict]:
    labels = sorted({s.label for s in parts.train})
    if len(labels) != 2:
        raise DatasetError(f"training needs exactly two classes, got {labels}")
    info: dict = {"labels": labels, "train_chars": {}, "model_entries": {}}
    models = {}
    t0 = time.perf_counter()
    for lab in labels:
        group = [s for s in parts.train if s.label == lab]
        ref, model = build_reference(group, k=k, alphabet=alphabet, lowercase=lowercase)
        models[lab] = model
        info["train_chars"][lab] = ref.total_chars
        info["model_entries"][lab] = model.num_entries
    info["train_seconds"] = time.perf_counter() - t0
    clf = BinaryClassifier(
        model_a=models[labels[0]],
        model_b=models[labels[1]],
        label_a=labels[0],
        label_b=labels[1],
        alphabet=alphabet,
        alpha=alpha,
        lowercase=lowercase,
    )
    return clf, info


# ----------------------------------------------------------------------
# subcommand implementations


def _cmd_train(args: argparse.Namespace) -> int:
    alphabet = _parse_alphabet(args.alphabet)
    out = _out_dir(args)
    parts, reports = _prepare_split(args, alphabet)
    clf, info = _train_classifier(parts, alphabet, args.k, args.alpha, not args.no_lowercase)
    manifest = save_bundle(clf, out)
    info["model_bytes"] = {
        lab: (out / path).stat().st_size
        for lab, path in (
            (clf.label_a, json.loads(manifest.read_text())["model_a_path"]),
            (clf.label_b, json.loads(manifest.read_text())["model_b_path"]),
        )
    }
    (out / "train_report.json").write_text(
        json.dumps({**reports, **info, "params": _pipeline_params(args)}, indent=2, sort_keys=True)
        + "\n"
    )
    summary = {
        "bundle": str(manifest),
        "labels": info["labels"],
        "train_chars": info["train_chars"],
        "model_entries": info["model_entries"],
        "model_bytes": info["model_bytes"],
        "train_seconds": round(info["train_seconds"], 3),
    }
    print(json.dumps(summary, sort_keys=True))
    return 0


def _iter_classify_inputs(args: argparse.Namespace):
    """Yield (id, text) pairs from --input (file or '-')."""
    if args.input == "-":
        fh = sys.stdin
        close = False
        name = "stdin"
    else:
        fh = open(args.input, "r", encoding="utf-8")
        close = True
        name = Path(args.input).name
    fmt = args.format
    if fmt is None:
        fmt = "jsonl" if str(args.input).endswith((".jsonl", ".ndjson")) else "lines"
    try:
        for lineno, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if fmt == "lines":
                yield f"{name}:{lineno}", line
            else:
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    print(f"{name}:{lineno}: skipped, invalid JSON: {exc}", file=sys.stderr)
                    continue
                if not isinstance(record, dict) or args.text_field not in record:
                    print(f"{name}:{lineno}: skipped, no {args.text_field!r} field", file=sys.stderr)
                    continue
                item_id = str(record.get(args.id_field, f"{name}:{lineno}"))
                yield item_id, str(record[args.text_field])
    finally:
        if close:
            fh.close()


def _decision_line(item_id: str, decision: Decision) -> str:
    payload: dict = {"id": item_id, "label": decision.label}
    for lab, bits in decision.bits.items():
        payload[f"bits_{lab}"] = bits
    payload["coded_symbols"] = decision.coded_symbols
    payload["margin_bits_per_symbol"] = decision.margin_bits_per_symbol
    payload["tie"] = decision.tie
    return json.dumps(payload, sort_keys=True)


def _cmd_classify(args: argparse.Namespace) -> int:
    items = list(_iter_classify_inputs(args))
    if args.server:
        return _classify_remote(args, items)
    clf = load_bundle(args.bundle)
    results = clf.classify_batch([text for _, text in items], workers=args.workers)
    for (item_id, _), result in zip(items, results):
        if isinstance(result, Exception):
            print(f"{item_id}: {result}", file=sys.stderr)
        else:
            print(_decision_line(item_id, result))
    return 0


def _classify_remote(args: argparse.Namespace, items: list[tuple[str, str]]) -> int:
    import httpx

    url = args.server.rstrip("/") + "/classify"
    with httpx.Client(timeout=120.0) as client:
        for start in range(0, len(items), 128):
            chunk = items[start : start + 128]
            payload = {"texts": [{"id": i, "text": t} for i, t in chunk]}
            response = client.post(url, json=payload)
            response.raise_for_status()
            for row in response.json()["results"]:
                if row.get("error"):
                    print(f"{row.get('id')}: {row['error']}", file=sys.stderr)
                    continue
                out = {"id": row.get("id"), "label": row["label"]}
                for lab, bits in (row.get("bits") or {}).items():
                    out[f"bits_{lab}"] = bits
                out["coded_symbols"] = row.get("coded_symbols")
                out["margin_bits_per_symbol"] = row.get("margin_bits_per_symbol")
                out["tie"] = row.get("tie")
                print(json.dumps(out, sort_keys=True))
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    clf = load_bundle(args.bundle)
    out = _out_dir(args)
    if args.split_test:
        parts, _ = _prepare_split(args, clf.alphabet)
        samples = parts.test
    else:
        samples, _ = load_dataset(
            args.data,
            format=args.format,
            text_field=args.text_field,
            label_field=args.label_field,
            label_map=args.label_map,
            delimiter=args.delimiter,
        )
    results = clf.classify_batch([s.text for s in samples])
    pairs = []
    errors = 0
    for sample, result in zip(samples, results):
        if isinstance(result, Exception):
            errors += 1
            print(f"{sample.id}: {result}", file=sys.stderr)
        else:
            pairs.append((sample.label, result.label))
    if not pairs:
        raise DatasetError("no classifiable samples to evaluate")
    positive = args.positive_label or min(clf.labels)
    report = score(pairs, positive_label=positive)
    save_confusion_csv(report.matrix, out / "confusion.csv")
    save_report_json(
        report,
        out / "evaluation.json",
        extra={"n_scored": len(pairs), "n_errors": errors, "data": str(args.data)},
    )
    print(
        json.dumps(
            {
                "accuracy": report.accuracy,
                "f1": report.f1,
                "n_scored": len(pairs),
                "n_errors": errors,
            },
            sort_keys=True,
        )
    )
    return 0


def _progress_printer(enabled: bool):
    if not enabled:
        return None
    return lambda msg: print(msg, file=sys.stderr)


def _cmd_experiment(args: argparse.Namespace) -> int:
    alphabet = _parse_alphabet(args.alphabet)
    out = _out_dir(args)
    parts, _ = _prepare_split(args, alphabet)
    params = _pipeline_params(args)
    progress = _progress_printer(not args.quiet)
    positive = args.positive_label

    if args.kind == "grid":
        rows = grid_search(
            parts,
            k_values=args.k_values,
            alpha_values=args.alpha_values,
            alphabet=alphabet,
            lowercase=not args.no_lowercase,
            positive_label=positive,
            progress=progress,
        )
        path = save_grid_search(
            rows,
            out,
            {**params, "k_values": args.k_values, "alpha_values": args.alpha_values},
        )
        best = max(rows, key=lambda r: r.f1)
        print(json.dumps({"artifact": str(path), "best_k": best.k, "best_alpha": best.alpha, "best_f1": best.f1}))
        return 0

    if args.kind == "trim":
        rows = alphabet_trim_study(
            parts,
            k=args.k,
            alpha=args.alpha,
            presets=args.presets,
            lowercase=not args.no_lowercase,
            positive_label=positive,
            progress=progress,
        )
        path = save_trim_study(rows, out, {**params, "k": args.k, "alpha": args.alpha, "presets": list(args.presets)})
        print(json.dumps({"artifact": str(path), "f1": {r.alphabet: r.f1 for r in rows}}))
        return 0

    if args.kind == "reflen":
        points = reference_length_curve(
            parts,
            k=args.k,
            alpha=args.alpha,
            alphabet=alphabet,
            start=args.start,
            step=args.step,
            max_chars=args.max_chars,
            lowercase=not args.no_lowercase,
            positive_label=positive,
            progress=progress,
        )
        path = save_curve(
            points,
            out,
            REF_LENGTH_CSV,
            "ref_chars",
            {**params, "k": args.k, "alpha": args.alpha, "start": args.start, "step": args.step, "max_chars": args.max_chars},
        )
        print(json.dumps({"artifact": str(path), "points": len(points)}))
        return 0

    if args.kind == "prefix":
        clf, _ = _train_classifier(parts, alphabet, args.k, args.alpha, not args.no_lowercase)
        pool = {"test": parts.test, "validation": parts.validation, "train": parts.train}[args.partition]
        points = target_prefix_curve(
            clf,
            pool,
            samples_per_class=args.samples_per_class,
            max_prefix=args.max_prefix,
            prefix_step=args.prefix_step,
            positive_label=positive,
            progress=progress,
        )
        path = save_curve(
            points,
            out,
            TARGET_PREFIX_CSV,
            "prefix_chars",
            {
                **params,
                "k": args.k,
                "alpha": args.alpha,
                "partition": args.partition,
                "samples_per_class": args.samples_per_class,
                "max_prefix": args.max_prefix,
                "prefix_step": args.prefix_step,
            },
        )
        print(json.dumps({"artifact": str(path), "points": len(points)}))
        return 0

    if args.kind == "bench":
        t0 = time.perf_counter()
        clf, _ = _train_classifier(parts, alphabet, args.k, args.alpha, not args.no_lowercase)
        build_seconds = time.perf_counter() - t0
        texts = [s.text for s in parts.test]
        report = throughput_bench(
            clf, texts, repetitions=args.repetitions, model_build_seconds=build_seconds
        )
        path = save_throughput(
            report,
            out,
            {**params, "k": args.k, "alpha": args.alpha, "repetitions": args.repetitions, "single_thread": True},
        )
        print(json.dumps({"artifact": str(path), "chars_per_second": report["chars_per_second"]}))
        return 0

    raise ExperimentError(f"unknown experiment kind {args.kind!r}")


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from fcmdetect.service.app import create_app

    app = create_app(args.bundle)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# ----------------------------------------------------------------------
# parser wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fcmdetect",
        description="Detect machine-generated text with per-class finite-context models.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit class models from a labeled dataset")
    _add_data_args(p_train)
    _add_pipeline_args(p_train)
    _add_out_arg(p_train)
    p_train.set_defaults(func=_cmd_train)

    p_classify = sub.add_parser("classify", help="label texts with a trained bundle")
    p_classify.add_argument("--bundle", help="bundle directory or manifest path")
    p_classify.add_argument("--input", default="-", help="text file, JSONL file, or - for stdin")
    p_classify.add_argument("--format", choices=["lines", "jsonl"], help="input layout")
    p_classify.add_argument("--text-field", default="text")
    p_classify.add_argument("--id-field", default="id")
    p_classify.add_argument("--workers", type=int, default=1)
    p_classify.add_argument("--server", help="classify via a running service at this base URL")
    p_classify.set_defaults(func=_cmd_classify)

    p_eval = sub.add_parser("evaluate", help="score a labeled file against a bundle")
    p_eval.add_argument("--bundle", required=True)
    _add_data_args(p_eval)
    p_eval.add_argument("--positive-label", help="class treated as positive (default: smaller label)")
    p_eval.add_argument(
        "--split-test",
        action="store_true",
        help="clean and split the data, then score only the test partition",
    )
    p_eval.add_argument("--seed", type=int, default=42)
    p_eval.add_argument("--ratios", type=_parse_ratios, default=(0.8, 0.1, 0.1))
    p_eval.add_argument("--min-chars", type=int, default=50)
    p_eval.add_argument("--no-balance", action="store_true")
    p_eval.add_argument("--no-lowercase", action="store_true")
    _add_out_arg(p_eval)
    p_eval.set_defaults(func=_cmd_evaluate)

    p_exp = sub.add_parser("experiment", help="sweeps, curves and benchmarks")
    exp_sub = p_exp.add_subparsers(dest="kind", required=True)

    def exp_parser(kind: str, help_text: str) -> argparse.ArgumentParser:
        p = exp_sub.add_parser(kind, help=help_text)
        _add_data_args(p)
        _add_pipeline_args(p)
        _add_out_arg(p)
        p.add_argument("--positive-label", help="class treated as positive in f1")
        p.add_argument("--quiet", action="store_true", help="suppress progress lines on stderr")
        p.set_defaults(func=_cmd_experiment)
        return p

    p_grid = exp_parser("grid", "sweep context order and smoothing")
    p_grid.add_argument("--k-values", type=_parse_int_list, default=list(range(3, 11)))
    p_grid.add_argument(
        "--alpha-values", type=_parse_float_list, default=[0.1, 0.5, 1.0, 5.0, 10.0]
    )

    p_trim = exp_parser("trim", "compare alphabet presets at fixed k and alpha")
    p_trim.add_argument(
        "--presets",
        type=lambda v: [p.strip() for p in v.split(",") if p.strip()],
        default=["sigma1", "sigma2", "sigma3", "sigma4"],
    )

    p_ref = exp_parser("reflen", "accuracy as reference material grows")
    p_ref.add_argument("--start", type=int, default=100_000)
    p_ref.add_argument("--step", type=int, default=100_000)
    p_ref.add_argument("--max-chars", type=int, default=None)

    p_prefix = exp_parser("prefix", "accuracy as target prefixes grow")
    p_prefix.add_argument("--samples-per-class", type=int, default=1500)
    p_prefix.add_argument("--max-prefix", type=int, default=1500)
    p_prefix.add_argument("--prefix-step", type=int, default=50)
    p_prefix.add_argument(
        "--partition", choices=["test", "validation", "train"], default="test",
        help="where the fixed target samples come from",
    )

    p_bench = exp_parser("bench", "single-worker inference throughput")
    p_bench.add_argument("--repetitions", type=int, default=3)
    p_bench.add_argument(
        "--single-thread",
        action="store_true",
        help="run inference on one worker (always on; flag kept for explicit runs)",
    )

    p_serve = sub.add_parser("serve", help="serve a bundle over HTTP")
    p_serve.add_argument("--bundle", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if args.command == "classify" and not args.server and not args.bundle:
        print("usage error: classify needs --bundle or --server", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130


def entrypoint() -> None:
    sys.exit(main(argv=None))


if __name__ == "__main__":
    entrypoint()
