"""Batch entry points: simulate, train, diagnose, explain, report, serve.

Data goes to stdout as compact JSON (identical to the HTTP payloads);
diagnostics and errors go to stderr. Exit codes: 0 success, 1 validation
failure, 2 runtime error, 3 bad usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import payloads
from .analytics import compute_bundle
from .errors import DomainError, ParseError, WorkbenchError
from .explain import (
    ContrastiveQuery,
    CounterfactualQuery,
    build_reasoning_chain,
    contrastive,
    counterfactual,
)
from .ingest import (
    EncodedDataset,
    ValidationReport,
    decode_csv_bytes,
    encode,
    parse_responses,
    qmatrix_csv,
    responses_csv,
)
from .model import FORMAT_VERSION, ModelParams, dump_json, load_model, save_model
from .posterior import diagnose
from .synth import SynthConfig, generate
from .train import TrainConfig, fit

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_USAGE = 3


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse funnels all usage problems here
        raise UsageError(message)


def _read_csv(path: str) -> str:
    p = Path(path)
    if p.suffix.lower() in (".xls", ".xlsx"):
        raise ParseError(
            "ExcelNotSupported",
            f"{path} is an Excel file; export the sheet as CSV and retry",
        )
    return decode_csv_bytes(p.read_bytes(), source=path)


def _emit(doc, pretty: bool = False) -> None:
    if pretty:
        print(json.dumps(doc, ensure_ascii=False, indent=2))
    else:
        print(dump_json(doc))


def _fail_validation(report: ValidationReport) -> int:
    print(dump_json(report.to_dict()), file=sys.stderr)
    return EXIT_VALIDATION


def _load_dataset_for_model(params: ModelParams, responses_path: str):
    records = parse_responses(_read_csv(responses_path))
    result = encode(records, params.qmatrix)
    if not isinstance(result, EncodedDataset):
        return None, result
    return result, None


def _student_responses(dataset: EncodedDataset, student_id: str):
    """Observed (item, correct) pairs; a header-only file means an empty
    evidence set for any student, which diagnoses to the neutral prior."""
    if not dataset.records:
        return []
    if student_id not in dataset.student_index:
        raise DomainError(
            "UnknownStudent", f"student {student_id!r} has no responses in the file"
        )
    return dataset.responses_for(student_id)


def cmd_simulate(args) -> int:
    items_per_kc = args.items_per_kc
    if items_per_kc is None:
        items_per_kc = min(25, args.items // args.kcs)
    config = SynthConfig(
        n_students=args.students,
        n_items=args.items,
        n_kcs=args.kcs,
        items_per_kc=items_per_kc,
        slip=args.slip,
        guess=args.guess,
        seed=args.seed,
    )
    truth, dataset = generate(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "responses.csv").write_text(responses_csv(dataset))
    (out / "qmatrix.csv").write_text(qmatrix_csv(dataset))
    ground = {
        "student_ids": dataset.student_ids,
        "item_ids": dataset.item_ids,
        "kc_ids": dataset.kc_ids,
        "true_mastery": truth.true_mastery.tolist(),
        "probabilities": truth.probabilities.tolist(),
        "qmatrix": truth.qmatrix.entries.astype(int).tolist(),
        "slip": truth.slip,
        "guess": truth.guess,
        "seed": truth.seed,
    }
    (out / "groundtruth.json").write_text(dump_json(ground) + "\n")
    _emit(
        {
            "out_dir": str(out),
            "files": ["responses.csv", "qmatrix.csv", "groundtruth.json"],
            "n_students": dataset.N,
            "n_items": dataset.M,
            "n_kcs": dataset.K,
            "n_records": len(dataset.records),
        },
        args.pretty,
    )
    return EXIT_OK


def cmd_train(args) -> int:
    from .ingest import load_dataset

    result = load_dataset(_read_csv(args.responses), _read_csv(args.qmatrix))
    if not isinstance(result, EncodedDataset):
        return _fail_validation(result)
    overrides = {
        name: value
        for name, value in [
            ("learning_rate", args.lr),
            ("epochs", args.epochs),
            ("seed", args.seed),
            ("hidden1", args.h1),
            ("hidden2", args.h2),
            ("optimizer", args.optimizer),
            ("holdout_fraction", args.holdout),
            ("init_scale", args.init_scale),
            ("discrimination_mode", args.disc_mode),
        ]
        if value is not None
    }
    params, report = fit(result, TrainConfig(**overrides))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_model(params, out / "model.json")
    doc = payloads.train_report_payload(report)
    (out / "trainreport.json").write_text(dump_json(doc) + "\n")
    _emit(doc, args.pretty)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    params = load_model(args.model)
    dataset, report = _load_dataset_for_model(params, args.responses)
    if report is not None:
        return _fail_validation(report)
    responses = _student_responses(dataset, args.student)
    state = diagnose(params, responses)
    chain = build_reasoning_chain(params, state)
    _emit(payloads.diagnose_payload(params, state, chain), args.pretty)
    return EXIT_OK


def _parse_overrides(spec_text: str) -> dict[str, float]:
    out: dict[str, float] = {}
    for part in spec_text.split(","):
        if "=" not in part:
            raise UsageError(f"--set expects KC=VALUE pairs, got {part!r}")
        kc, _, raw = part.partition("=")
        try:
            out[kc.strip()] = float(raw)
        except ValueError:
            raise UsageError(f"--set value for {kc.strip()!r} is not a number") from None
    return out


def cmd_explain_contrastive(args) -> int:
    params = load_model(args.model)
    dataset, report = _load_dataset_for_model(params, args.responses)
    if report is not None:
        return _fail_validation(report)
    responses = _student_responses(dataset, args.student)
    flips = []
    if args.flip:
        item_index = {item: e for e, item in enumerate(params.qmatrix.item_ids)}
        for token in args.flip.split(","):
            token = token.strip()
            if token not in item_index:
                raise DomainError("UnknownItem", f"item {token!r} is not in the model")
            flips.append(item_index[token])
    result = contrastive(params, ContrastiveQuery(responses, flip_items=flips))
    _emit(payloads.contrastive_payload(params, result), args.pretty)
    return EXIT_OK


def cmd_explain_counterfactual(args) -> int:
    params = load_model(args.model)
    dataset, report = _load_dataset_for_model(params, args.responses)
    if report is not None:
        return _fail_validation(report)
    responses = _student_responses(dataset, args.student)
    kc_index = {kc: k for k, kc in enumerate(params.qmatrix.kc_ids)}
    overrides: dict[int, float] = {}
    for kc, value in _parse_overrides(args.set).items():
        if kc not in kc_index:
            raise DomainError("UnknownKC", f"KC {kc!r} is not in the model")
        overrides[kc_index[kc]] = value
    target_items = None
    if args.items:
        item_index = {item: e for e, item in enumerate(params.qmatrix.item_ids)}
        target_items = []
        for token in args.items.split(","):
            token = token.strip()
            if token not in item_index:
                raise DomainError("UnknownItem", f"item {token!r} is not in the model")
            target_items.append(item_index[token])
    base = diagnose(params, responses)
    query = CounterfactualQuery(
        base_mastery=base.mastery,
        overrides=overrides,
        threshold=args.threshold,
        target_items=target_items,
    )
    result = counterfactual(params, query)
    _emit(payloads.counterfactual_payload(params, query, result), args.pretty)
    return EXIT_OK


def cmd_report(args) -> int:
    params = load_model(args.model)
    dataset, report = _load_dataset_for_model(params, args.responses)
    if report is not None:
        return _fail_validation(report)
    bundle = compute_bundle(dataset, params)
    doc = payloads.report_payload(bundle)
    if args.format == "md":
        print(payloads.report_markdown(doc))
    else:
        _emit(doc, args.pretty)
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    serve(host=args.host, port=args.port, ui_dir=args.ui_dir)
    return EXIT_OK


def _json_emitting(p: argparse.ArgumentParser) -> argparse.ArgumentParser:
    p.add_argument("--pretty", action="store_true", help="indent JSON output")
    return p


def build_parser() -> Parser:
    parser = Parser(prog="cdw", description=__doc__)
    parser.add_argument(
        "--version", action="version", version=f"cdw model-format {FORMAT_VERSION}"
    )
    sub = parser.add_subparsers(dest="command")

    p = _json_emitting(
        sub.add_parser("simulate", help="generate a synthetic class with ground truth")
    )
    p.add_argument("--students", type=int, required=True)
    p.add_argument("--items", type=int, required=True)
    p.add_argument("--kcs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--items-per-kc", type=int, default=None,
                   help="per-KC item target; default min(25, items // kcs)")
    p.add_argument("--slip", type=float, default=0.1)
    p.add_argument("--guess", type=float, default=0.15)
    p.set_defaults(func=cmd_simulate)

    p = _json_emitting(sub.add_parser("train", help="fit a model to responses + Q-matrix"))
    p.add_argument("--responses", required=True)
    p.add_argument("--qmatrix", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--h1", type=int, default=None)
    p.add_argument("--h2", type=int, default=None)
    p.add_argument("--optimizer", choices=["sgd", "adam"], default=None)
    p.add_argument("--holdout", type=float, default=None)
    p.add_argument("--init-scale", type=float, default=None)
    p.add_argument("--disc-mode", choices=["scalar", "per_kc"], default=None)
    p.set_defaults(func=cmd_train)

    p = _json_emitting(sub.add_parser("diagnose", help="estimate one student's mastery"))
    p.add_argument("--model", required=True)
    p.add_argument("--responses", required=True)
    p.add_argument("--student", required=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("explain", help="contrastive or counterfactual explanation")
    esub = p.add_subparsers(dest="mode")
    pc = _json_emitting(esub.add_parser("contrastive", help="re-diagnose with flipped responses"))
    pc.add_argument("--model", required=True)
    pc.add_argument("--responses", required=True)
    pc.add_argument("--student", required=True)
    pc.add_argument("--flip", default="", help="comma-separated item ids to toggle")
    pc.set_defaults(func=cmd_explain_contrastive)
    pf = _json_emitting(esub.add_parser("counterfactual", help="what-if replay at asserted mastery"))
    pf.add_argument("--model", required=True)
    pf.add_argument("--responses", required=True)
    pf.add_argument("--student", required=True)
    pf.add_argument("--set", required=True, help="KC=VALUE[,KC=VALUE...] overrides")
    pf.add_argument("--items", default="", help="restrict to these item ids")
    pf.add_argument("--threshold", type=float, default=0.5)
    pf.set_defaults(func=cmd_explain_counterfactual)

    p = _json_emitting(sub.add_parser("report", help="class analytics report"))
    p.add_argument("--model", required=True)
    p.add_argument("--responses", required=True)
    p.add_argument("--format", choices=["json", "md"], default="json")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None, help="default: $PORT or 8000")
    p.add_argument("--ui-dir", default=None, help="serve a built web UI from this dir")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.command == "explain" and not getattr(args, "mode", None):
        print("usage error: explain needs a mode: contrastive | counterfactual",
              file=sys.stderr)
        return EXIT_USAGE

    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        report = ValidationReport(errors=[(exc.code, exc.line, exc.message)])
        return _fail_validation(report)
    except WorkbenchError as exc:
        print(dump_json(exc.to_dict()), file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(dump_json({"code": "IOError", "message": str(exc)}), file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # pragma: no cover - unexpected faults
        print(dump_json({"code": "InternalError", "message": repr(exc)}),
              file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
