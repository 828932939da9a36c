"""Command-line interface: scan, focused, registry and fixtures commands.

Exit codes: 0 success, 1 usage error, 2 the scan produced only misses,
3 the page could not be fetched.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .driver import NotAnIdpUrl, PageFetchError, ScanConfig, focused_scan, scan_rp
from .fixtures import BindError, load_corpus, serve_fixtures
from .protocol import ProtocolError
from .registry import Registry, RegistryError, load_default_registry, load_registry_path
from .report import render_json, render_text

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ONLY_MISSES = 2
EXIT_FETCH_FAILURE = 3

REGISTRY_ENV_VAR = "SPEYE_REGISTRY"


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("json", "text"), default="text")
    parser.add_argument("--max-redirects", type=int, default=5, metavar="N")
    parser.add_argument("--timeout-ms", type=int, default=8000, metavar="N")
    parser.add_argument("--parallel", type=int, default=3, metavar="N")
    parser.add_argument("--registry", metavar="PATH")
    parser.add_argument("--deterministic", action="store_true")
    parser.add_argument("--output", metavar="PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speye",
        description="Compare the permissions a site's SSO login options would request.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    scan = commands.add_parser("scan", help="scan a login page and compare its SSO options")
    scan.add_argument("url")
    _add_common_flags(scan)

    focused = commands.add_parser(
        "focused", help="extract permissions from an IdP authorization URL, offline"
    )
    focused.add_argument("url")
    _add_common_flags(focused)

    registry_cmd = commands.add_parser("registry", help="summarize the loaded scope catalog")
    _add_common_flags(registry_cmd)

    fixtures = commands.add_parser("fixtures", help="serve the bundled mock site corpus")
    fixtures.add_argument("--listen", default="127.0.0.1:0", metavar="ADDR:PORT")
    fixtures.add_argument(
        "--emit-registry",
        metavar="PATH",
        help="write a registry file whose patterns also match the served mock IdPs",
    )
    fixtures.add_argument("--exit-after-start", action="store_true", help=argparse.SUPPRESS)

    return parser


def _load_registry(args) -> Registry:
    path = getattr(args, "registry", None) or os.environ.get(REGISTRY_ENV_VAR)
    if path:
        return load_registry_path(path)
    return load_default_registry()


def _emit(args, rendered: str) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(rendered)
    else:
        sys.stdout.write(rendered)


def _scan_config(args) -> ScanConfig:
    return ScanConfig(
        max_redirects=args.max_redirects,
        timeout_ms=args.timeout_ms,
        parallelism=args.parallel,
        deterministic_mode=args.deterministic,
    )


def _cmd_scan(args) -> int:
    registry = _load_registry(args)
    report = scan_rp(args.url, _scan_config(args), registry)
    _emit(args, render_json(report) if args.format == "json" else render_text(report))
    if report.misses and not report.idp_results:
        return EXIT_ONLY_MISSES
    return EXIT_OK


def _cmd_focused(args) -> int:
    registry = _load_registry(args)
    report = focused_scan(args.url, registry)
    _emit(args, render_json(report) if args.format == "json" else render_text(report))
    return EXIT_OK


def _cmd_registry(args) -> int:
    registry = _load_registry(args)
    providers = []
    for idp in registry.idp_display_order:
        permissions = [p for p in registry.permissions if p.idp == idp]
        providers.append(
            {
                "idp": idp.name,
                "endpoint_patterns": sum(1 for p in registry.endpoint_patterns if p.idp == idp),
                "scopes": len(permissions),
                "basic": sum(1 for p in permissions if p.category.value == "basic"),
                "extended": sum(1 for p in permissions if p.category.value == "extended"),
            }
        )
    if args.format == "json":
        _emit(args, json.dumps({"providers": providers}, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    lines = [
        f"Registry: {len(providers)} providers, "
        f"{len(registry.endpoint_patterns)} endpoint patterns, "
        f"{len(registry.permissions)} scopes"
    ]
    for entry in providers:
        lines.append(
            f"  {entry['idp']}: {entry['endpoint_patterns']} endpoint patterns, "
            f"{entry['scopes']} scopes ({entry['basic']} basic, {entry['extended']} extended)"
        )
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_fixtures(args) -> int:
    host, _, port = args.listen.rpartition(":")
    try:
        server = serve_fixtures(load_corpus(), host=host or "127.0.0.1", port=int(port))
    except (BindError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"Serving fixture corpus at {server.base_url}")
    for site in server.corpus:
        print(f"  {server.base_url}/{site.name}  ({site.title})")
    if args.emit_registry:
        with open(args.emit_registry, "w", encoding="utf-8") as handle:
            handle.write(server.overlay_registry_json())
        print(f"Overlay registry written to {args.emit_registry}")
    if args.exit_after_start:
        server.shutdown()
        return EXIT_OK
    try:
        while True:
            server._thread.join(1)
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    try:
        if args.command == "scan":
            return _cmd_scan(args)
        if args.command == "focused":
            return _cmd_focused(args)
        if args.command == "registry":
            return _cmd_registry(args)
        return _cmd_fixtures(args)
    except PageFetchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FETCH_FAILURE
    except (NotAnIdpUrl,) as exc:
        print(f"error: not an IdP authorization URL: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProtocolError, RegistryError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
