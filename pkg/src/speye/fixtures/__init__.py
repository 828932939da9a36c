"""A local mock web estate for deterministic, offline end-to-end runs.

Synthetic relying-party sites cover the client-side SSO code patterns, and
mock IdP authorization endpoints live under ``/idp/<name>/`` on the same
server. Because production endpoint patterns never match loopback URLs,
tests use a registry overlay that adds loopback equivalents of the endpoint
expressions while leaving the shipped patterns untouched.

Page bodies and redirect locations may contain ``{base}`` (the server's base
URL) and ``{base_enc}`` (the same, percent-encoded for embedding in query
parameter values); both are substituted once the listen port is known.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path
from urllib.parse import parse_qsl, quote, urlsplit

from ..registry import EndpointPattern, Registry, load_default_registry
from ..protocol import APPLE, FACEBOOK, GOOGLE


class BindError(Exception):
    """The requested bind address is unavailable."""


@dataclass(frozen=True)
class ResponseRule:
    """How a site path answers: a redirect or a fixed response.

    ``when_field`` restricts the rule to requests whose form/query field
    carries ``when_value``. ``require_header`` models servers that reject
    requests lacking browser-managed headers: absent header means
    ``blocked_status`` instead of the normal answer.
    """

    path: str
    status: int
    location: str | None = None
    body: str | None = None
    method: str | None = None
    when_field: str | None = None
    when_value: str | None = None
    require_header: str | None = None
    blocked_status: int = 403


@dataclass(frozen=True)
class FixtureSite:
    """One synthetic RP site: pages, response rules and authored ground truth."""

    name: str
    title: str
    pages: dict[str, str]
    rules: tuple[ResponseRule, ...]
    expected: dict


def _load_site(directory: Path) -> FixtureSite:
    meta = json.loads((directory / "site.json").read_text(encoding="utf-8"))
    pages = {
        path: (directory / filename).read_text(encoding="utf-8")
        for path, filename in meta.get("pages", {}).items()
    }
    rules = tuple(
        ResponseRule(
            path=rule["path"],
            status=rule.get("status", 200),
            location=rule.get("location"),
            body=rule.get("body"),
            method=rule.get("method"),
            when_field=rule.get("when_field"),
            when_value=rule.get("when_value"),
            require_header=rule.get("require_header"),
            blocked_status=rule.get("blocked_status", 403),
        )
        for rule in meta.get("rules", [])
    )
    return FixtureSite(
        name=meta["name"],
        title=meta.get("title", meta["name"]),
        pages=pages,
        rules=rules,
        expected=meta.get("expected", {}),
    )


def corpus_path() -> Path:
    return Path(str(resources.files("speye").joinpath("fixtures/corpus")))


def load_corpus(path: Path | None = None) -> list[FixtureSite]:
    """Load every fixture site from a corpus directory (packaged by default)."""
    root = path or corpus_path()
    sites = []
    for directory in sorted(root.iterdir(), key=lambda d: (len(d.name), d.name)):
        if directory.is_dir() and (directory / "site.json").exists():
            sites.append(_load_site(directory))
    return sites


_MOCK_IDP_PAGE = (
    "<!DOCTYPE html><html><head><title>Mock IdP</title></head>"
    "<body><h1>Mock IdP login</h1><p>This endpoint only exists for tests.</p></body></html>"
)

# Loopback equivalents of the endpoint expression shapes, one per provider.
_OVERLAY_SHAPES = (
    (FACEBOOK, "{base}/idp/facebook/(.*)/oauth(.*)"),
    (GOOGLE, "{base}/idp/google/(.*)/oauth(.*)"),
    (APPLE, "{base}/idp/apple/auth(.*)"),
)

_LOGGED_HEADERS = (
    "Cookie",
    "Authorization",
    "User-Agent",
    "Sec-Fetch-Dest",
    "Sec-Fetch-Mode",
    "Content-Type",
)


def overlay_registry_for_base(base_url: str, base: Registry | None = None) -> Registry:
    """The base registry plus loopback equivalents of the endpoint shapes,
    anchored at ``base_url``. Production patterns are left untouched."""
    base = base or load_default_registry()
    escaped = re.escape(base_url)
    extra = []
    for idp, shape in _OVERLAY_SHAPES:
        pattern = shape.replace("{base}", escaped)
        extra.append(EndpointPattern(idp=idp, pattern=pattern, regex=re.compile(pattern)))
    return Registry(
        endpoint_patterns=base.endpoint_patterns + tuple(extra),
        permissions=base.permissions,
        idp_display_order=base.idp_display_order,
        sdk_hosts=base.sdk_hosts,
        _by_scope=dict(base._by_scope),
    )


class _FixtureHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: "_FixtureHttpd"

    def log_message(self, _format, *_args):  # keep test output quiet
        return

    def _record(self) -> None:
        entry = {"method": self.command, "path": self.path}
        for header in _LOGGED_HEADERS:
            entry[header.lower().replace("-", "_")] = self.headers.get(header)
        with self.server.log_lock:
            self.server.request_log.append(entry)

    def _send(self, status: int, body: str = "", content_type: str = "text/html; charset=utf-8",
              location: str | None = None) -> None:
        payload = body.encode("utf-8")
        self.send_response(status)
        if location is not None:
            self.send_header("Location", location)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        if self.command != "HEAD":
            self.wfile.write(payload)

    def _request_fields(self, query: str) -> dict[str, str]:
        fields = dict(parse_qsl(query, keep_blank_values=True))
        if self.command == "POST":
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length).decode("utf-8") if length else ""
            fields.update(dict(parse_qsl(raw, keep_blank_values=True)))
        return fields

    def _handle(self) -> None:
        self._record()
        parts = urlsplit(self.path)
        path = parts.path

        if path == "/healthz":
            self._send(200, "ok", content_type="text/plain; charset=utf-8")
            return
        if path.startswith("/idp/"):
            self._send(200, _MOCK_IDP_PAGE)
            return

        segments = path.strip("/").split("/", 1)
        site = self.server.sites.get(segments[0]) if segments[0] else None
        if site is None:
            self._send(404, "<html><body>not found</body></html>")
            return
        local_path = "/" + (segments[1] if len(segments) > 1 else "")

        for rule in site.rules:
            if rule.path != local_path:
                continue
            if rule.method and rule.method.upper() != self.command:
                continue
            if rule.when_field is not None:
                fields = self._request_fields(parts.query)
                if fields.get(rule.when_field) != rule.when_value:
                    continue
            if rule.require_header and not self.headers.get(rule.require_header):
                self._send(rule.blocked_status, "<html><body>request blocked</body></html>")
                return
            location = self.server.substitute(rule.location) if rule.location else None
            body = self.server.substitute(rule.body) if rule.body else ""
            self._send(rule.status, body, location=location)
            return

        page = site.pages.get(local_path)
        if page is None and local_path == "/":
            page = site.pages.get("/index.html")
        if page is not None:
            self._send(200, self.server.substitute(page))
            return
        self._send(404, "<html><body>not found</body></html>")

    def do_GET(self):
        self._handle()

    def do_POST(self):
        self._handle()

    def do_HEAD(self):
        self._handle()


class _FixtureHttpd(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address, sites: dict[str, FixtureSite]):
        super().__init__(address, _FixtureHandler)
        self.sites = sites
        self.request_log: list[dict] = []
        self.log_lock = threading.Lock()
        self.base_url = f"http://{self.server_address[0]}:{self.server_address[1]}"

    def substitute(self, text: str) -> str:
        return text.replace("{base_enc}", quote(self.base_url, safe="")).replace(
            "{base}", self.base_url
        )


class FixtureServer:
    """Running fixture estate; use as a context manager or call shutdown()."""

    def __init__(self, corpus: list[FixtureSite], host: str = "127.0.0.1", port: int = 0):
        try:
            self._httpd = _FixtureHttpd((host, port), {site.name: site for site in corpus})
        except OSError as exc:
            raise BindError(f"cannot bind {host}:{port}: {exc}") from exc
        self.corpus = list(corpus)
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._shutdown = False

    def start(self) -> "FixtureServer":
        self._thread.start()
        return self

    @property
    def base_url(self) -> str:
        return self._httpd.base_url

    @property
    def request_log(self) -> list[dict]:
        with self._httpd.log_lock:
            return list(self._httpd.request_log)

    def clear_request_log(self) -> None:
        with self._httpd.log_lock:
            self._httpd.request_log.clear()

    def site_url(self, name: str) -> str:
        return f"{self.base_url}/{name}"

    def overlay_registry(self, base: Registry | None = None) -> Registry:
        """The base registry plus loopback equivalents of the endpoint shapes."""
        return overlay_registry_for_base(self.base_url, base)

    def overlay_registry_json(self) -> str:
        """Registry document with the loopback patterns appended, for --registry."""
        doc = json.loads(
            resources.files("speye").joinpath("data/registry.json").read_text(encoding="utf-8")
        )
        escaped = re.escape(self.base_url)
        for idp, shape in _OVERLAY_SHAPES:
            doc["endpoints"].append({"idp": idp.name, "pattern": shape.replace("{base}", escaped)})
        return json.dumps(doc, indent=2)

    def shutdown(self) -> None:
        """Stop serving; safe to call more than once."""
        if self._shutdown:
            return
        self._shutdown = True
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread.is_alive():
            self._thread.join(timeout=5)

    def __enter__(self) -> "FixtureServer":
        return self

    def __exit__(self, *exc_info) -> None:
        self.shutdown()


def serve_fixtures(corpus: list[FixtureSite], host: str = "127.0.0.1", port: int = 0) -> FixtureServer:
    """Serve each site under its own path prefix; returns the running handle."""
    return FixtureServer(corpus, host=host, port=port).start()
