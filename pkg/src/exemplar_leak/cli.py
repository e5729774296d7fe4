"""Command-line front end.

Subcommands:
    synth     generate a synthetic dataset (manifest.json + data.f32)
    audit     run the leakage audit and emit reports
    compare   run both protocols and report accuracy deltas
    validate  check a dataset's label bookkeeping

Exit codes: 0 success, 1 leak found under --fail-on-leak, 2 configuration
error, 3 I/O error, 4 pipeline error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__, audit as audit_mod, report as report_mod
from .dataset import load_dataset, save_dataset, validate_dataset
from .errors import ConfigError, DataError, ExemplarLeakError
from .splits import LEAKY_STRATIFIED
from .synth import SynthConfig, apply_overrides, generate_synthetic, preset

EXIT_OK = 0
EXIT_LEAK = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_PIPELINE = 4

THREADS_ENV = "EXEMPLAR_LEAK_THREADS"


def _parse_set(pairs: list[str]) -> dict:
    """Parse repeated --set key=value flags; values are JSON when possible."""
    out: dict = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return out


def _deep_update(base: dict, overrides: dict) -> dict:
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value
    return base


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}")
    return 1


def _load_json_file(path: str) -> dict:
    if not os.path.exists(path):
        raise DataError(f"file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def cmd_synth(args) -> int:
    if args.preset:
        cfg = preset(args.preset)
    elif args.config:
        doc = _load_json_file(args.config)
        cfg = apply_overrides(SynthConfig(), doc)
    else:
        raise ConfigError("synth needs --preset or --config")
    overrides = _parse_set(args.set)
    if args.seed is not None:
        overrides["seed"] = args.seed
    cfg = apply_overrides(cfg, overrides)
    cfg.validate()

    dataset = generate_synthetic(cfg)
    manifest_path = save_dataset(dataset, args.output_dir)

    report = validate_dataset(dataset)
    summary = {
        "manifest": manifest_path,
        "n_trials": dataset.n_trials,
        "n_channels": dataset.n_channels,
        "n_samples": dataset.n_samples,
        "n_subjects": len(dataset.manifest.subject_ids),
        "trials_per_exemplar": report.trials_per_exemplar,
        "exemplars_per_category": report.exemplars_per_category,
    }
    if args.json:
        print(json.dumps(summary, sort_keys=True, indent=2))
    else:
        print(f"wrote {manifest_path}")
        print(f"trials: {dataset.n_trials}  "
              f"shape: {dataset.n_channels}x{dataset.n_samples}  "
              f"subjects: {len(dataset.manifest.subject_ids)}")
        print("trials per exemplar: "
              + _counts_summary(report.trials_per_exemplar))
        print("exemplars per category: "
              + _counts_summary(report.exemplars_per_category))
    return EXIT_OK


def _counts_summary(counts: dict) -> str:
    values = sorted(set(counts.values()))
    if len(values) == 1:
        return f"{values[0]} (uniform over {len(counts)})"
    return ", ".join(f"{k}:{v}" for k, v in sorted(counts.items()))


def _build_audit_config(args) -> audit_mod.AuditConfig:
    doc = _load_json_file(args.config)
    _deep_update(doc, _parse_set(args.set))
    if getattr(args, "assignment", None):
        doc.setdefault("assignment", {})["path"] = args.assignment
    return audit_mod.AuditConfig.from_dict(doc)


def _formats(args) -> tuple[str, ...]:
    formats = tuple(f.strip() for f in args.formats.split(",") if f.strip())
    unknown = set(formats) - {"json", "csv", "svg"}
    if unknown:
        raise ConfigError(f"unknown formats: {sorted(unknown)}")
    return formats


def _print_verdict_table(report: audit_mod.AuditReport, out=None):
    out = out if out is not None else sys.stdout
    header = (f"{'classifier':<14} {'protocol':<18} {'mean acc':>9} "
              f"{'chance':>8} {'p-value':>12} verdict")
    print(header, file=out)
    for protocol, by_clf in report.tests.items():
        for name, result in by_clf.items():
            verdict = report.verdicts[name] \
                if protocol == LEAKY_STRATIFIED else ""
            print(f"{name:<14} {protocol:<18} "
                  f"{result.mean_accuracy:>9.4f} {result.chance:>8.4f} "
                  f"{result.p_value:>12.3e} {verdict}", file=out)


def cmd_audit(args) -> int:
    cfg = _build_audit_config(args)
    report = audit_mod.run_audit(cfg, threads=_threads(args))
    written = report_mod.emit_report(report, args.output_dir, _formats(args))
    if args.json:
        print(report_mod.canonical_json(report.to_dict()), end="")
    else:
        _print_verdict_table(report)
        for path in written:
            print(f"wrote {path}")
    leak = any(v == audit_mod.LEAK_INDICATED for v in report.verdicts.values())
    if args.fail_on_leak and leak:
        return EXIT_LEAK
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _build_audit_config(args)
    comparison = audit_mod.compare_protocols(cfg, threads=_threads(args))
    written = report_mod.emit_report(comparison, args.output_dir,
                                     _formats(args))
    if args.json:
        print(report_mod.canonical_json(comparison.to_dict()), end="")
    else:
        print(f"{'classifier':<14} {'delta':>9} {'95% CI':>22} excludes 0")
        for name in comparison.audit.classifier_names:
            d = comparison.deltas[name]
            ci = f"[{d['ci_low']:+.4f}, {d['ci_high']:+.4f}]"
            print(f"{name:<14} {d['delta']:>+9.4f} {ci:>22} "
                  f"{d['excludes_zero']}")
        for path in written:
            print(f"wrote {path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    dataset = load_dataset(args.manifest)
    report = validate_dataset(dataset)
    if args.json:
        print(json.dumps({
            "trials_per_exemplar": report.trials_per_exemplar,
            "exemplars_per_category": report.exemplars_per_category,
            "trials_per_subject": report.trials_per_subject,
            "inconsistent_exemplars": report.inconsistent_exemplars,
            "ok": report.ok,
        }, sort_keys=True, indent=2))
    else:
        print(f"trials: {dataset.n_trials}")
        print("trials per exemplar: "
              + _counts_summary(report.trials_per_exemplar))
        print("exemplars per category: "
              + _counts_summary(report.exemplars_per_category))
        print("trials per subject: "
              + _counts_summary(report.trials_per_subject))
        if report.inconsistent_exemplars:
            print("INCONSISTENT exemplars (multiple categories): "
                  f"{report.inconsistent_exemplars}")
        else:
            print("label bookkeeping: OK")
    return EXIT_OK if report.ok else EXIT_PIPELINE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exemplar-leak",
        description="Detect repeated-exemplar leakage in multi-trial "
                    "classification datasets via pseudocategory audits.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    synth = sub.add_parser(
        "synth", help="generate a synthetic dataset",
        description="Generate a synthetic dataset and write manifest.json "
                    "plus the float32 payload to the output directory.")
    synth.add_argument("--preset", help="preset name: kaneshiro-like or "
                                        "gifford-like")
    synth.add_argument("--config", help="path to a synth config JSON file")
    synth.add_argument("--seed", type=int, help="override the config seed")
    synth.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config field (repeatable)")
    synth.add_argument("-o", "--output-dir", required=True,
                       help="directory for manifest.json and data.f32")
    synth.add_argument("--json", action="store_true",
                       help="print a JSON summary to stdout")
    synth.set_defaults(func=cmd_synth)

    for name, func, extra_help in (
            ("audit", cmd_audit, "run the leakage audit"),
            ("compare", cmd_compare,
             "compare leaky vs clean protocol accuracies")):
        cmd = sub.add_parser(name, help=extra_help, description=extra_help)
        cmd.add_argument("--config", required=True,
                         help="audit config JSON file")
        cmd.add_argument("--set", action="append", metavar="KEY=VALUE",
                         help="override a config entry by dotted path "
                              "(repeatable)")
        cmd.add_argument("--assignment",
                         help="pseudocategory assignment JSON file to use "
                              "instead of generating one")
        cmd.add_argument("-o", "--output-dir", required=True,
                         help="directory for report files")
        cmd.add_argument("--formats", default="json,csv",
                         help="comma-separated subset of json,csv,svg")
        cmd.add_argument("--threads", type=int,
                         help=f"worker threads (default 1 or ${THREADS_ENV})")
        cmd.add_argument("--json", action="store_true",
                         help="print the full report JSON to stdout")
        if name == "audit":
            cmd.add_argument("--fail-on-leak", action="store_true",
                             help="exit 1 when any classifier's verdict is "
                                  "LEAK-INDICATED")
        cmd.set_defaults(func=func)

    validate = sub.add_parser(
        "validate", help="validate a dataset's label bookkeeping",
        description="Load a dataset and report per-exemplar, per-category "
                    "and per-subject counts plus label inconsistencies.")
    validate.add_argument("manifest", help="path to manifest.json")
    validate.add_argument("--json", action="store_true",
                          help="print the report as JSON")
    validate.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ExemplarLeakError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
