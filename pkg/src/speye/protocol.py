"""Parsing, classification and rewriting of OAuth 2.0 / OIDC authorization requests.

Everything here is pure and operates on immutable values, so the functions are
safe to call from any number of concurrent scan tasks.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from urllib.parse import quote, unquote, urlsplit


class ProtocolError(Exception):
    """Base class for authorization-request parsing errors."""


class MalformedUrl(ProtocolError):
    """The input is not a parseable absolute http(s) URL."""


class NotAnSsoRequest(ProtocolError):
    """The URL parses fine but carries none of the OAuth request parameters."""


class OptOutNotPresent(ProtocolError):
    """An opt-out names a scope token the request never asked for."""


@dataclass(frozen=True, order=True)
class IdpId:
    """Identity-provider identifier with a canonical lowercase name.

    Facebook, Google and Apple are the built-ins every deployment supports;
    any other provider is represented by its own lowercase name.
    """

    name: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "name", self.name.strip().lower())

    def __str__(self) -> str:
        return self.name


FACEBOOK = IdpId("facebook")
GOOGLE = IdpId("google")
APPLE = IdpId("apple")

#: The providers the tool must support out of the box, in display order.
BUILTIN_IDPS: tuple[IdpId, ...] = (FACEBOOK, GOOGLE, APPLE)


class FlowName(str, Enum):
    AUTHORIZATION_CODE = "authorization_code"
    IMPLICIT = "implicit"
    OIDC_VARIANT = "oidc_variant"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class FlowKind:
    """Classified OAuth flow. ``response_type`` keeps the raw parameter value,
    which is the only taxonomy offered for the various OIDC response types."""

    name: FlowName
    response_type: str | None = None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.name.value}
        if self.response_type is not None:
            out["response_type"] = self.response_type
        return out


# Delimiters accepted inside a raw (still percent-encoded) scope value.
_SCOPE_DELIMS = re.compile(r"%2[Cc]|%20|[,+ ]")

# Query parameters promoted to named request fields; the rest land in
# ``extra_params`` in document order.
_KNOWN_PARAMS = ("client_id", "redirect_uri", "response_type", "scope", "state", "nonce")


@dataclass(frozen=True)
class _RawParam:
    name: str
    value: str
    raw_name: str
    raw_value: str


def _split_url(url: str):
    if not isinstance(url, str) or not url.strip():
        raise MalformedUrl("empty URL")
    try:
        parts = urlsplit(url)
    except ValueError as exc:
        raise MalformedUrl(f"unparseable URL {url!r}: {exc}") from exc
    if parts.scheme not in ("http", "https"):
        raise MalformedUrl(f"not an absolute http(s) URL: {url!r}")
    if not parts.netloc:
        raise MalformedUrl(f"URL has no host: {url!r}")
    return parts


def _parse_query(raw_query: str) -> list[_RawParam]:
    params = []
    for segment in raw_query.split("&"):
        if not segment:
            continue
        raw_name, _, raw_value = segment.partition("=")
        params.append(
            _RawParam(
                name=unquote(raw_name),
                value=unquote(raw_value),
                raw_name=raw_name,
                raw_value=raw_value,
            )
        )
    return params


def split_scope_value(raw_value: str) -> tuple[list[str], str | None]:
    """Split a raw scope value into raw tokens plus the first delimiter found.

    The delimiter is returned exactly as it appeared (``,``, ``%2C``, ``+``,
    ``%20`` or a literal space) so a rewrite can re-join with the site's own
    convention.
    """
    match = _SCOPE_DELIMS.search(raw_value)
    delimiter = match.group(0) if match else None
    raw_tokens = [t for t in _SCOPE_DELIMS.split(raw_value) if t]
    return raw_tokens, delimiter


def split_scope_tokens(value: str) -> list[str]:
    """Split an already-decoded scope string into trimmed tokens.

    Duplicates and ordering are preserved; empty fragments are dropped.
    """
    raw_tokens, _ = split_scope_value(value)
    return [t.strip() for t in (unquote(t) for t in raw_tokens) if t.strip()]


@dataclass(frozen=True)
class AuthorizationRequest:
    """A parsed OAuth/OIDC authorization request URL.

    ``scopes`` keeps the request's token order and duplicates; values of all
    parameters are percent-decoded exactly once. ``raw_url`` is the input
    verbatim, and ``scope_delimiter`` records the raw join string detected at
    parse time (None when the request had fewer than two scope tokens).
    """

    endpoint: str
    raw_url: str
    idp: IdpId | None = None
    client_id: str | None = None
    redirect_uri: str | None = None
    response_type: str | None = None
    scopes: tuple[str, ...] = ()
    state: str | None = None
    nonce: str | None = None
    extra_params: tuple[tuple[str, str], ...] = ()
    scope_delimiter: str | None = None
    scope_present: bool = False

    def serialize(self) -> str:
        """Rebuild a URL carrying every parameter of the original request.

        Parameter order is canonical rather than original; scope token order
        is preserved and joined with the detected delimiter (mixed-delimiter
        requests normalize to the first delimiter found).
        """
        pairs: list[tuple[str, str | None]] = [
            ("client_id", self.client_id),
            ("redirect_uri", self.redirect_uri),
            ("response_type", self.response_type),
        ]
        segments = [f"{quote(n, safe='')}={quote(v, safe='')}" for n, v in pairs if v is not None]
        if self.scope_present:
            delimiter = self.scope_delimiter or "%20"
            if delimiter == " ":
                delimiter = "%20"
            joined = delimiter.join(quote(t, safe="") for t in self.scopes)
            segments.append(f"scope={joined}")
        for name, value in (("state", self.state), ("nonce", self.nonce)):
            if value is not None:
                segments.append(f"{quote(name, safe='')}={quote(value, safe='')}")
        for name, value in self.extra_params:
            segments.append(f"{quote(name, safe='')}={quote(value, safe='')}")
        if not segments:
            return self.endpoint
        return f"{self.endpoint}?{'&'.join(segments)}"

    def to_dict(self) -> dict:
        out: dict = {
            "endpoint": self.endpoint,
            "raw_url": self.raw_url,
            "idp": self.idp.name if self.idp else None,
            "client_id": self.client_id,
            "redirect_uri": self.redirect_uri,
            "response_type": self.response_type,
            "scopes": list(self.scopes),
            "state": self.state,
            "nonce": self.nonce,
            "extra_params": [[n, v] for n, v in self.extra_params],
        }
        return out


def parse_authorization_request(url: str, registry=None) -> AuthorizationRequest:
    """Parse an absolute http(s) URL into an :class:`AuthorizationRequest`.

    A URL qualifies when it carries at least one of client_id, response_type
    or scope; anything else raises :class:`NotAnSsoRequest`. Unparseable
    input raises :class:`MalformedUrl` instead. When a registry is supplied,
    its endpoint patterns fill the ``idp`` field.
    """
    parts = _split_url(url)
    params = _parse_query(parts.query)
    names = {p.name for p in params}
    if not names & {"client_id", "response_type", "scope"}:
        raise NotAnSsoRequest(url)

    fields: dict[str, str | None] = {name: None for name in _KNOWN_PARAMS}
    scope_raw: str | None = None
    extras: list[tuple[str, str]] = []
    for param in params:
        if param.name in fields and fields[param.name] is None:
            fields[param.name] = param.value
            if param.name == "scope":
                scope_raw = param.raw_value
        else:
            extras.append((param.name, param.value))

    scopes: tuple[str, ...] = ()
    delimiter: str | None = None
    if scope_raw is not None:
        raw_tokens, delimiter = split_scope_value(scope_raw)
        scopes = tuple(t.strip() for t in (unquote(t) for t in raw_tokens) if t.strip())

    idp = registry.match_endpoint(url) if registry is not None else None
    return AuthorizationRequest(
        endpoint=f"{parts.scheme}://{parts.netloc}{parts.path}",
        raw_url=url,
        idp=idp,
        client_id=fields["client_id"],
        redirect_uri=fields["redirect_uri"],
        response_type=fields["response_type"],
        scopes=scopes,
        state=fields["state"],
        nonce=fields["nonce"],
        extra_params=tuple(extras),
        scope_delimiter=delimiter,
        scope_present=fields["scope"] is not None,
    )


def classify_flow(request: AuthorizationRequest) -> FlowKind:
    """Map a parsed request onto its OAuth flow.

    An ``openid`` scope or an ``id_token`` response type marks the request as
    an OIDC variant regardless of the rest; plain ``code`` and ``token``
    response types are the two classic OAuth flows.
    """
    response_type = request.response_type
    if "openid" in request.scopes or (response_type and "id_token" in response_type):
        return FlowKind(FlowName.OIDC_VARIANT, response_type)
    if response_type == "code":
        return FlowKind(FlowName.AUTHORIZATION_CODE, response_type)
    if response_type == "token":
        return FlowKind(FlowName.IMPLICIT, response_type)
    return FlowKind(FlowName.UNKNOWN, response_type)


def rewrite_without_scopes(request: AuthorizationRequest, optout) -> str:
    """Return ``request.raw_url`` with the opted-out scope tokens removed.

    Only the scope parameter changes: surviving tokens keep their original
    bytes and order, re-joined with the delimiter detected at parse time, and
    every other byte of the URL is spliced through untouched. Removing every
    token leaves an empty ``scope=`` parameter in place. Tokens absent from
    the request raise :class:`OptOutNotPresent`.
    """
    optout = set(optout)
    missing = optout - set(request.scopes)
    if missing:
        raise OptOutNotPresent(f"scopes not present in request: {sorted(missing)}")
    if not optout:
        return request.raw_url

    base, _, rest = request.raw_url.partition("?")
    query, sep, fragment = rest.partition("#")
    segments = query.split("&")
    for i, segment in enumerate(segments):
        raw_name, eq, raw_value = segment.partition("=")
        if unquote(raw_name) != "scope":
            continue
        raw_tokens, delimiter = split_scope_value(raw_value)
        kept = [t for t in raw_tokens if unquote(t).strip() not in optout]
        segments[i] = f"{raw_name}={(delimiter or '%20').join(kept)}"
        break
    return f"{base}?{'&'.join(segments)}{sep}{fragment}"
