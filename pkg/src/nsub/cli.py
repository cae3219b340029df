"""Command-line surface: build substrates, attach layers, verify, export.

Exit-status discipline, asserted across the whole command matrix:
  0  success, or the verdict holds as claimed for the shipped default schema
  1  domain violation, or the verdict contradicts the claim
  2  environment or usage error (I/O, parse errors, malformed schema files)

No command mutates a store on a non-zero exit: the store file is rewritten
canonically (temp file + atomic replace) only after the operation succeeded
in memory. A sidecar `<store>.lock` advisory lock serializes commands that
touch the same store file.
"""

from __future__ import annotations

import argparse
import contextlib
import fcntl
import json
import os
import sys
import tempfile

from .errors import InputFormatError, SubstrateError
from .interchange import export_clif, export_log, import_log
from .layers import ExtensionLayer, LayeredStore
from .schema import SubstrateSchema, canonical_json, default_schema, load_schema
from .verifier import (
    check_requirements,
    tightness_report,
    verify_all_pairs,
    verify_partitions,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

SCHEMA_ENV_VAR = "NS_SCHEMA"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InputFormatError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SubstrateError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsub",
        description="Typed entity/relation substrate with regime-collapse verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create an empty store")
    p.add_argument("store")
    p.set_defaults(handler=cmd_init)

    p = sub.add_parser("add", help="append an entity or relation")
    p.add_argument("store")
    p.add_argument("kind", choices=["entity", "relation"])
    p.add_argument("--schema", help="custom schema JSON (default: built-in)")
    p.add_argument("--regime", help="regime id (entity)")
    p.add_argument("--id", dest="entity_id", help="entity id (entity)")
    p.add_argument(
        "--attr",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="attribute; VALUE parsed as JSON scalar, else taken as string",
    )
    p.add_argument("--occurred-at", help="RFC 3339 UTC timestamp (occurrent regimes)")
    p.add_argument("--asserted-at", help="RFC 3339 UTC timestamp (record regimes)")
    p.add_argument("--provenance")
    p.add_argument("--type", dest="rel_type", help="relation type (relation)")
    p.add_argument("--src", help="source entity id (relation)")
    p.add_argument("--dst", help="destination entity id (relation)")
    p.set_defaults(handler=cmd_add)

    p = sub.add_parser("layer", help="attach an extension layer from a JSON file")
    p.add_argument("store")
    p.add_argument("--attach", required=True, metavar="LAYERFILE")
    p.add_argument("--schema")
    p.set_defaults(handler=cmd_layer)

    p = sub.add_parser("conflicts", help="report contradictory layer annotations")
    p.add_argument("store")
    p.add_argument("--schema")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(handler=cmd_conflicts)

    p = sub.add_parser("project", help="print substrate records only, as JSON Lines")
    p.add_argument("store")
    p.add_argument("--schema")
    p.set_defaults(handler=cmd_project)

    p = sub.add_parser("verify", help="run the collapse verifier")
    p.add_argument(
        "--mode",
        choices=["pairs", "partitions", "requirements", "tightness"],
        required=True,
    )
    p.add_argument("--schema")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("export", help="write the store as .nslog or .clif")
    p.add_argument("store")
    p.add_argument("--format", choices=["clif", "log"], required=True)
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--schema")
    p.set_defaults(handler=cmd_export)

    p = sub.add_parser("import", help="validate a log and write its canonical form")
    p.add_argument("source")
    p.add_argument("--out", required=True)
    p.add_argument("--schema")
    p.set_defaults(handler=cmd_import)

    return parser


# -- command handlers ---------------------------------------------------------


def cmd_init(args) -> int:
    try:
        with open(args.store, "xb"):
            pass
    except FileExistsError:
        print(f"error: {args.store} already exists", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def cmd_add(args) -> int:
    schema = _resolve_schema(args)
    with _store_lock(args.store):
        layered = _load(args.store, schema)
        if args.kind == "entity":
            if not args.regime or not args.entity_id:
                print("error: add entity requires --regime and --id", file=sys.stderr)
                return EXIT_USAGE
            layered.base.create_entity(
                regime=args.regime,
                entity_id=args.entity_id,
                attributes=dict(_parse_attr(a) for a in args.attr),
                occurred_at=args.occurred_at,
                asserted_at=args.asserted_at,
                provenance=args.provenance,
            )
        else:
            if not args.rel_type or not args.src or not args.dst:
                print("error: add relation requires --type, --src and --dst", file=sys.stderr)
                return EXIT_USAGE
            layered.base.add_relation(args.rel_type, args.src, args.dst)
        _save(args.store, layered)
    return EXIT_OK


def cmd_layer(args) -> int:
    schema = _resolve_schema(args)
    layer = _load_layer_file(args.attach)
    with _store_lock(args.store):
        layered = _load(args.store, schema)
        layered = layered.apply_extension(layer)
        _save(args.store, layered)
    return EXIT_OK


def cmd_conflicts(args) -> int:
    layered = _load(args.store, _resolve_schema(args))
    conflicts = layered.detect_conflicts()
    if args.format == "json":
        print(canonical_json([c.to_payload() for c in conflicts]))
    else:
        for c in conflicts:
            entries = " ".join(f"{layer}={json.dumps(value)}" for layer, value in c.entries)
            print(f"{c.target} {c.key}: {entries}")
        print(f"{len(conflicts)} conflict(s)")
    return EXIT_OK


def cmd_project(args) -> int:
    layered = _load(args.store, _resolve_schema(args))
    sys.stdout.buffer.write(export_log(layered, substrate_only=True))
    sys.stdout.buffer.flush()
    return EXIT_OK


def cmd_verify(args) -> int:
    schema = _resolve_schema(args)
    if args.mode == "pairs":
        report = verify_all_pairs(schema)
        expected = report.all_inadmissible
        text = _pairs_text(report)
    elif args.mode == "partitions":
        report = verify_partitions(schema)
        expected = report.all_inadmissible
        text = _partitions_text(report)
    elif args.mode == "requirements":
        report = check_requirements(schema)
        expected = report.overall
        text = _requirements_text(report)
    else:
        report = tightness_report(schema)
        expected = report.verdict == "tight at 6"
        text = _tightness_text(report)
    if args.format == "json":
        print(canonical_json(report.to_payload()))
    else:
        print(text)
    claim_attached = getattr(report, "claim_attached", schema.is_default())
    return EXIT_OK if (claim_attached and expected) else EXIT_VIOLATION


def cmd_export(args) -> int:
    layered = _load(args.store, _resolve_schema(args))
    if args.format == "clif":
        data = export_clif(layered).encode("utf-8")
    else:
        data = export_log(layered)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    return EXIT_OK


def cmd_import(args) -> int:
    with open(args.source, "rb") as fh:
        data = fh.read()
    layered = import_log(data, _resolve_schema(args))
    if os.path.exists(args.out):
        print(f"error: {args.out} already exists", file=sys.stderr)
        return EXIT_USAGE
    _save(args.out, layered)
    return EXIT_OK


# -- report rendering -----------------------------------------------------------


def _claim_lines(report) -> list[str]:
    if report.claim_attached:
        return []
    return [report.to_payload()["claim"]]


def _pairs_text(report) -> str:
    lines = _claim_lines(report)
    for cert in report.certificates:
        pair = next(b for b in cert.merged_blocks if len(b) >= 2)
        modes = ", ".join(cert.failures[0].modes) if cert.failures else ""
        lines.append(f"{'+'.join(pair)}: {cert.verdict}" + (f" [{modes}]" if modes else ""))
    lines.append(f"{report.inadmissible}/{report.total} collapses inadmissible")
    return "\n".join(lines)


def _partitions_text(report) -> str:
    lines = _claim_lines(report)
    lines.append(
        f"{report.inadmissible}/{report.partition_count} non-trivial partitions inadmissible"
    )
    return "\n".join(lines)


def _requirements_text(report) -> str:
    lines = []
    for check in report.checks:
        status = "pass" if check.passed else "FAIL"
        lines.append(f"{check.requirement} {status}: {check.evidence}")
    if report.overall:
        lines.append("R1-R6 pass")
    else:
        failing = [c.requirement for c in report.checks if not c.passed]
        lines.append(f"{len(failing)} requirement(s) failing: {', '.join(failing)}")
    return "\n".join(lines)


def _tightness_text(report) -> str:
    lines = _claim_lines(report)
    payload = report.to_payload()
    necessity = payload["necessity"]
    lines.append(
        "necessity: pairs {inadmissible}/{total} inadmissible".format(
            inadmissible=necessity["pairs"]["inadmissible"], total=necessity["pairs"]["total"]
        )
    )
    lines.append(
        "necessity: partitions {i}/{n} inadmissible".format(
            i=necessity["partitions"]["inadmissible"], n=necessity["partitions"]["partitionCount"]
        )
    )
    realization = "pass" if necessity["distinctRealization"]["passed"] else "FAIL"
    lines.append(f"necessity: distinct capability realization {realization}")
    lines.append(f"sufficiency: requirements {'pass' if report.sufficiency_passed else 'FAIL'}")
    lines.append(report.verdict)
    return "\n".join(lines)


# -- helpers ---------------------------------------------------------------------


def _resolve_schema(args) -> SubstrateSchema:
    path = getattr(args, "schema", None) or os.environ.get(SCHEMA_ENV_VAR)
    if path:
        return load_schema(path)
    return default_schema()


def _load(path: str, schema: SubstrateSchema) -> LayeredStore:
    with open(path, "rb") as fh:
        return import_log(fh.read(), schema)


def _save(path: str, layered: LayeredStore) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".nsub-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(export_log(layered))
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


@contextlib.contextmanager
def _store_lock(path: str):
    lock_path = path + ".lock"
    with open(lock_path, "a+b") as fh:
        fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(fh.fileno(), fcntl.LOCK_UN)


def _parse_attr(raw: str) -> tuple[str, object]:
    key, sep, value = raw.partition("=")
    if not sep or not key:
        raise InputFormatError(f"--attr expects KEY=VALUE, got {raw!r}")
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        return key, value
    if isinstance(parsed, (dict, list)) or parsed is None:
        return key, value
    return key, parsed


def _load_layer_file(path: str) -> ExtensionLayer:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"layer file is not valid JSON: {exc}") from None
    try:
        return ExtensionLayer.from_payload(doc)
    except (KeyError, TypeError) as exc:
        raise InputFormatError(f"layer document is missing or mistypes a field: {exc}") from None


if __name__ == "__main__":
    sys.exit(main())
