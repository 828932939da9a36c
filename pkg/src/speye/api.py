"""Local HTTP service exposing scan operations to the companion dashboard.

Binds loopback by default and serves the dashboard bundle from the same
origin when a static directory is supplied; a permissive cross-origin mode
exists behind an explicit flag for dashboard development. Request bodies
are never logged (scope strings may be sensitive).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from urllib.parse import urlsplit

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .driver import NotAnIdpUrl, PageFetchError, ScanConfig, focused_scan, scan_rp
from .protocol import MalformedUrl, NotAnSsoRequest, OptOutNotPresent, ProtocolError, parse_authorization_request, rewrite_without_scopes
from .registry import Registry, load_default_registry, load_registry_path
from .report import render_json

DEFAULT_LISTEN = "127.0.0.1:7465"


class ApiError(Exception):
    """Error shaped for the wire: a closed code set plus a message."""

    CODES = ("invalid_url", "not_idp_url", "fetch_failed", "internal")

    def __init__(self, status: int, code: str, message: str):
        assert code in self.CODES
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class OptOutBody(BaseModel):
    url: str
    scopes: list[str]


def _require_absolute_url(value: str | None) -> str:
    if not value:
        raise ApiError(400, "invalid_url", "missing url parameter")
    parts = urlsplit(value)
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise ApiError(400, "invalid_url", f"not an absolute http(s) URL: {value!r}")
    return value


def _json_response(report) -> Response:
    # render_json is the canonical byte form; do not re-serialize.
    return Response(content=render_json(report), media_type="application/json")


def create_app(
    registry: Registry | None = None,
    scan_config: ScanConfig | None = None,
    static_dir: str | Path | None = None,
    cors: bool = False,
) -> FastAPI:
    registry = registry or load_default_registry()
    scan_config = scan_config or ScanConfig()
    app = FastAPI(title="speye", docs_url=None, redoc_url=None)

    if cors:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
        )

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400, content={"code": "invalid_url", "message": str(exc.errors()[:1])}
        )

    @app.get("/api/scan")
    def api_scan(url: str | None = None):
        target = _require_absolute_url(url)
        try:
            report = scan_rp(target, scan_config, registry)
        except PageFetchError as exc:
            raise ApiError(502, "fetch_failed", str(exc)) from exc
        except Exception as exc:  # pragma: no cover - defensive
            raise ApiError(500, "internal", str(exc)) from exc
        return _json_response(report)

    @app.get("/api/focused")
    def api_focused(url: str | None = None):
        target = _require_absolute_url(url)
        try:
            report = focused_scan(target, registry)
        except NotAnIdpUrl as exc:
            raise ApiError(400, "not_idp_url", f"no IdP endpoint pattern matches: {exc}") from exc
        except NotAnSsoRequest as exc:
            raise ApiError(
                400, "not_idp_url", f"IdP URL carries no authorization request: {exc}"
            ) from exc
        except MalformedUrl as exc:
            raise ApiError(400, "invalid_url", str(exc)) from exc
        return _json_response(report)

    @app.post("/api/optout")
    def api_optout(body: OptOutBody):
        target = _require_absolute_url(body.url)
        if registry.match_endpoint(target) is None:
            raise ApiError(400, "not_idp_url", f"no IdP endpoint pattern matches: {target!r}")
        try:
            request = parse_authorization_request(target, registry)
            rewritten = rewrite_without_scopes(request, set(body.scopes))
        except OptOutNotPresent as exc:
            raise ApiError(400, "invalid_url", str(exc)) from exc
        except ProtocolError as exc:
            raise ApiError(400, "invalid_url", str(exc)) from exc
        return JSONResponse(content={"rewritten_url": rewritten})

    @app.get("/api/registry")
    def api_registry(request: Request):
        params = dict(request.query_params)
        idp_filter = params.pop("idp", None)
        if params:
            raise ApiError(400, "invalid_url", f"unknown query parameters: {sorted(params)}")
        pattern_idps = [p.idp for p in registry.endpoint_patterns]
        idps = sorted({idp.name for idp in pattern_idps})
        if idp_filter is not None:
            if not idp_filter or idp_filter.lower() not in idps:
                raise ApiError(400, "invalid_url", f"unknown idp filter: {idp_filter!r}")
            idps = [idp_filter.lower()]
        scope_counts = {
            name: sum(1 for p in registry.permissions if p.idp.name == name) for name in idps
        }
        payload = {"idps": idps, "scope_counts": scope_counts}
        return Response(
            content=json.dumps(payload, sort_keys=True, indent=2) + "\n",
            media_type="application/json",
        )

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="dashboard")

    return app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="speye-api", description="Run the local scan service.")
    parser.add_argument("--listen", default=DEFAULT_LISTEN, metavar="ADDR:PORT")
    parser.add_argument("--registry", metavar="PATH")
    parser.add_argument("--static", metavar="DIR", help="serve the dashboard bundle from this directory")
    parser.add_argument("--cors", action="store_true", help="allow cross-origin requests (development)")
    parser.add_argument("--deterministic", action="store_true")
    args = parser.parse_args(argv)

    registry = load_registry_path(args.registry) if args.registry else load_default_registry()
    app = create_app(
        registry=registry,
        scan_config=ScanConfig(deterministic_mode=args.deterministic),
        static_dir=args.static,
        cors=args.cors,
    )
    host, _, port = args.listen.rpartition(":")
    import uvicorn

    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


if __name__ == "__main__":
    sys.exit(main())
