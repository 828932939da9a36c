"""Drive detected login candidates over HTTP and collect authorization requests.

The driver follows redirect chains hop by hop, testing every location
against the registry and stopping at the first IdP match without contacting
the IdP itself. Requests carry no cookies, no credentials and no state from
earlier scans. Focused mode generates no traffic at all: the supplied IdP
URL is parsed in place.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from urllib.parse import urlsplit

import requests

from .protocol import (
    AuthorizationRequest,
    IdpId,
    ProtocolError,
    parse_authorization_request,
    rewrite_without_scopes,
)
from .registry import Registry, load_default_registry
from .report import (
    FocusedReport,
    MissReason,
    ResultSource,
    ScanMiss,
    ScanReport,
    build_comparative_report,
    build_idp_result,
)
from .scanner import (
    AttributeSource,
    FormDescriptor,
    NotHtmlContent,
    PatternClass,
    SsoCandidate,
    classify_pattern,
    extract_sdk_scopes,
    find_csrf_meta_tags,
    find_sso_candidates,
    parse_page,
)


class PageFetchError(Exception):
    """The relying-party page itself could not be retrieved."""


class NotAnIdpUrl(Exception):
    """Focused mode got a URL no registry endpoint pattern matches."""


REDIRECT_STATUSES = {301, 302, 303, 307, 308}

# Candidate kinds the driver resolves; click handlers and SDK calls are never
# driven (static extraction only).
DRIVEABLE_SOURCES = {
    AttributeSource.HREF_LINK,
    AttributeSource.FORM_SUBMIT,
    AttributeSource.IFRAME_SRC,
    AttributeSource.TITLE_ATTR,
}

SCRIPT_ONLY_DETAIL = "script-driven; static extraction only"


@dataclass(frozen=True)
class ScanConfig:
    max_redirects: int = 5
    timeout_ms: int = 8000
    parallelism: int = 3
    user_agent: str = "speye/0.1"
    deterministic_mode: bool = False

    def __post_init__(self) -> None:
        if self.max_redirects < 1:
            raise ValueError("max_redirects must be >= 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")

    @property
    def timeout_seconds(self) -> float:
        return self.timeout_ms / 1000.0


class TerminalKind(str, Enum):
    IDP_ENDPOINT = "idp_endpoint"
    NON_REDIRECT_RESPONSE = "non_redirect_response"
    DEPTH_EXCEEDED = "depth_exceeded"
    NETWORK_ERROR = "network_error"
    BLOCKED = "blocked"


@dataclass(frozen=True)
class Terminal:
    kind: TerminalKind
    request: AuthorizationRequest | None = None
    status: int | None = None
    reason: str | None = None


@dataclass(frozen=True)
class Hop:
    """One URL in a chain. ``status`` is None for URLs the driver never
    requested (the terminal IdP endpoint, or a request that failed)."""

    url: str
    status: int | None
    location: str | None


@dataclass(frozen=True)
class RedirectChain:
    hops: tuple[Hop, ...]
    terminal: Terminal


def _try_idp_terminal(url: str, registry: Registry) -> Terminal | None:
    if registry.match_endpoint(url) is None:
        return None
    try:
        request = parse_authorization_request(url, registry)
    except ProtocolError:
        # Matched an IdP host but carries no authorization parameters; keep
        # following the chain instead of claiming an extraction.
        return None
    return Terminal(TerminalKind.IDP_ENDPOINT, request=request)


def resolve_candidate(
    candidate: SsoCandidate, config: ScanConfig, registry: Registry
) -> RedirectChain:
    """Issue the candidate's request and follow redirects to a terminal.

    Every location is tested against the registry; the chain stops at the
    first IdP match, recording that URL as a final unrequested hop. No
    cookies or session state are ever sent.
    """
    if candidate.attribute_source not in DRIVEABLE_SOURCES:
        raise ValueError(f"candidate with source {candidate.attribute_source} is not driveable")

    headers = {"User-Agent": config.user_agent}
    hops: list[Hop] = []
    visited: set[str] = set()

    if isinstance(candidate.target, FormDescriptor):
        url: str = candidate.target.action
        method = candidate.target.method
        body: list[tuple[str, str]] | None = list(candidate.target.fields)
    else:
        url = candidate.target
        method = "GET"
        body = None

    for _ in range(config.max_redirects + 1):
        terminal = _try_idp_terminal(url, registry)
        if terminal is not None:
            hops.append(Hop(url, None, None))
            return RedirectChain(tuple(hops), terminal)
        if len(hops) >= config.max_redirects:
            break
        if url in visited:
            return RedirectChain(
                tuple(hops), Terminal(TerminalKind.DEPTH_EXCEEDED, reason="redirect loop")
            )
        visited.add(url)
        try:
            response = requests.request(
                method,
                url,
                headers=headers,
                data=body if method == "POST" else None,
                params=body if method == "GET" else None,
                timeout=config.timeout_seconds,
                allow_redirects=False,
            )
        except requests.Timeout as exc:
            hops.append(Hop(url, None, None))
            return RedirectChain(
                tuple(hops), Terminal(TerminalKind.NETWORK_ERROR, reason=f"timeout: {exc}")
            )
        except requests.RequestException as exc:
            hops.append(Hop(url, None, None))
            return RedirectChain(
                tuple(hops), Terminal(TerminalKind.NETWORK_ERROR, reason=str(exc))
            )

        status = response.status_code
        location = response.headers.get("Location")
        hops.append(Hop(url, status, location))
        if status in REDIRECT_STATUSES and location:
            url = requests.compat.urljoin(response.url, location)
            if status in (301, 302, 303):
                method, body = "GET", None
            continue
        if status == 403:
            return RedirectChain(
                tuple(hops), Terminal(TerminalKind.BLOCKED, status=status, reason="HTTP 403")
            )
        return RedirectChain(
            tuple(hops), Terminal(TerminalKind.NON_REDIRECT_RESPONSE, status=status)
        )

    return RedirectChain(
        tuple(hops),
        Terminal(
            TerminalKind.DEPTH_EXCEEDED,
            reason=f"no IdP endpoint within {config.max_redirects} redirects",
        ),
    )


def _classify_miss(
    candidate: SsoCandidate, chain: RedirectChain, csrf_metas: list[str]
) -> ScanMiss:
    terminal = chain.terminal
    if terminal.kind in (TerminalKind.NON_REDIRECT_RESPONSE, TerminalKind.BLOCKED) and csrf_metas:
        return ScanMiss(
            candidate,
            MissReason.CSRF_TOKEN_REQUIRED,
            "page carries CSRF token meta tags the driver does not replay "
            f"({', '.join(csrf_metas)}); got HTTP {terminal.status}",
        )
    if terminal.kind is TerminalKind.NON_REDIRECT_RESPONSE:
        return ScanMiss(
            candidate,
            MissReason.NON_REDIRECT,
            f"the site answered HTTP {terminal.status} instead of a redirect",
        )
    if terminal.kind is TerminalKind.BLOCKED:
        return ScanMiss(
            candidate,
            MissReason.FETCH_METADATA_BLOCKED,
            f"the site rejected the request ({terminal.reason}); browser-managed "
            "fetch-metadata headers cannot be replayed",
        )
    if terminal.kind is TerminalKind.DEPTH_EXCEEDED:
        return ScanMiss(candidate, MissReason.DEPTH_EXCEEDED, terminal.reason or "too many redirects")
    reason = terminal.reason or "network error"
    if "timeout" in reason.lower():
        return ScanMiss(candidate, MissReason.TIMEOUT, reason)
    return ScanMiss(candidate, MissReason.NETWORK_ERROR, reason)


def scan_rp(url: str, config: ScanConfig | None = None, registry: Registry | None = None) -> ScanReport:
    """Scan a relying-party login page and compare its SSO login options.

    Fetch the page, locate candidates, classify the client-side pattern,
    drive each driveable candidate (bounded parallelism) and assemble the
    comparative report; the report is complete even when every candidate
    misses.
    """
    if registry is None:
        registry = load_default_registry()
    config = config or ScanConfig()

    try:
        response = requests.get(
            url,
            headers={"User-Agent": config.user_agent},
            timeout=config.timeout_seconds,
            allow_redirects=True,
        )
    except requests.RequestException as exc:
        raise PageFetchError(f"could not fetch {url}: {exc}") from exc
    if response.status_code >= 400:
        raise PageFetchError(f"HTTP {response.status_code} fetching {url}")
    try:
        document = parse_page(response.content, response.headers.get("Content-Type"))
    except NotHtmlContent as exc:
        raise PageFetchError(str(exc)) from exc

    candidates = find_sso_candidates(document, response.url, registry)
    site_pattern, per_candidate = classify_pattern(document, candidates, registry)
    findings = extract_sdk_scopes(document)
    csrf_metas = find_csrf_meta_tags(document)

    driveable = [c for c in candidates if c.attribute_source in DRIVEABLE_SOURCES]
    chains: dict[str, RedirectChain] = {}
    if driveable:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            futures = {
                candidate.dom_locator: pool.submit(resolve_candidate, candidate, config, registry)
                for candidate in driveable
            }
            chains = {locator: future.result() for locator, future in futures.items()}

    driven: list[tuple[IdpId, AuthorizationRequest]] = []
    misses: list[ScanMiss] = []
    for candidate in driveable:
        chain = chains[candidate.dom_locator]
        if chain.terminal.kind is TerminalKind.IDP_ENDPOINT:
            request = chain.terminal.request
            assert request is not None and request.idp is not None
            driven.append((request.idp, request))
        else:
            misses.append(_classify_miss(candidate, chain, csrf_metas))

    finding_idps = {finding.idp for finding in findings}
    for candidate in candidates:
        if candidate.attribute_source in DRIVEABLE_SOURCES:
            continue
        if (
            per_candidate.get(candidate) is PatternClass.SDK_BASED
            and candidate.idp_hint in finding_idps
        ):
            continue
        misses.append(ScanMiss(candidate, MissReason.NON_REDIRECT, SCRIPT_ONLY_DETAIL))

    scanned_at = None if config.deterministic_mode else datetime.now(timezone.utc).isoformat()
    origin = urlsplit(url)
    return build_comparative_report(
        rp_origin=f"{origin.scheme}://{origin.netloc}",
        site_pattern=site_pattern,
        driven=driven,
        findings=findings,
        misses=misses,
        registry=registry,
        scanned_at=scanned_at,
    )


# Compact fallback for multi-label public suffixes; enough to identify the
# registrable domain of a redirect URI without a full public-suffix list.
_TWO_PART_SUFFIXES = {
    "ac.jp", "ac.uk", "co.in", "co.jp", "co.kr", "co.nz", "co.uk", "co.za",
    "com.ar", "com.au", "com.br", "com.cn", "com.hk", "com.mx", "com.sg",
    "com.tr", "com.tw", "edu.au", "gov.au", "gov.uk", "me.uk", "ne.jp",
    "net.au", "net.br", "net.cn", "net.in", "net.nz", "net.uk", "or.jp",
    "org.au", "org.br", "org.cn", "org.in", "org.nz", "org.uk",
}


def registrable_domain(url: str | None) -> str | None:
    """Best-effort registrable domain of a URL's host (IPs pass through)."""
    if not url:
        return None
    try:
        host = urlsplit(url).hostname
    except ValueError:
        return None
    if not host:
        return None
    labels = host.split(".")
    if len(labels) < 2 or all(label.isdigit() for label in labels):
        return host
    if len(labels) >= 3 and ".".join(labels[-2:]) in _TWO_PART_SUFFIXES:
        return ".".join(labels[-3:])
    return ".".join(labels[-2:])


def focused_scan(idp_url: str, registry: Registry) -> FocusedReport:
    """Parse an IdP authorization URL in place — no network traffic at all.

    Raises :class:`NotAnIdpUrl` when no endpoint pattern matches, and
    :class:`NotAnSsoRequest` when the page URL carries no authorization
    parameters.
    """
    idp = registry.match_endpoint(idp_url)
    if idp is None:
        raise NotAnIdpUrl(idp_url)
    request = parse_authorization_request(idp_url, registry)
    result = build_idp_result(idp, request.scopes, registry, ResultSource.FOCUSED_URL, request=request)
    rp_identifier = registrable_domain(request.redirect_uri) or request.client_id or ""
    previews = tuple(
        (permission.scope_token, rewrite_without_scopes(request, {permission.scope_token}))
        for permission in result.permissions
        if permission.optional
    )
    return FocusedReport(idp=idp, rp_identifier=rp_identifier, result=result, optout_previews=previews)
