"""Catalog of IdP endpoint patterns and scope-to-permission descriptions.

The catalog is data, not code: a JSON document with ``endpoints``,
``permissions`` and ``display_order`` keys (plus an optional ``sdk_hosts``
list), so new identity providers can be added without touching the scanner.
A registry is immutable after loading and safe to share across scans.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import IO

from .protocol import BUILTIN_IDPS, IdpId


class RegistryError(Exception):
    """Base class for registry loading problems."""


class RegistryParseError(RegistryError):
    """The registry document is syntactically or structurally invalid."""


class DuplicateScope(RegistryError):
    """Two permission rows share the same (idp, scope) pair."""


class BadPattern(RegistryError):
    """An endpoint pattern does not compile as a regular expression."""


class PermissionCategory(str, Enum):
    BASIC = "basic"
    EXTENDED = "extended"


@dataclass(frozen=True)
class Permission:
    """One scope token joined with its provider and human description.

    ``optional`` is None when the catalog cannot say (unrecognized tokens);
    ``recognized`` is False for permissions synthesized for unknown tokens.
    """

    idp: IdpId
    scope_token: str
    description: str
    category: PermissionCategory
    optional: bool | None
    privacy_note: str | None = None
    recognized: bool = True

    def to_dict(self) -> dict:
        out: dict = {
            "idp": self.idp.name,
            "scope": self.scope_token,
            "description": self.description,
            "category": self.category.value,
            "optional": self.optional,
            "recognized": self.recognized,
        }
        if self.privacy_note:
            out["privacy_note"] = self.privacy_note
        return out


@dataclass(frozen=True)
class EndpointPattern:
    """A full-URL regular expression identifying one IdP's endpoints."""

    idp: IdpId
    pattern: str
    regex: re.Pattern = field(repr=False, compare=False)

    def matches(self, url: str) -> bool:
        return self.regex.fullmatch(url) is not None


# Fallback when a registry document has no sdk_hosts key.
DEFAULT_SDK_HOSTS: tuple[tuple[str, str], ...] = (
    ("facebook", "connect.facebook.net"),
    ("google", "accounts.google.com"),
    ("google", "apis.google.com"),
    ("apple", "appleid.cdn-apple.com"),
)


@dataclass(frozen=True)
class Registry:
    endpoint_patterns: tuple[EndpointPattern, ...]
    permissions: tuple[Permission, ...]
    idp_display_order: tuple[IdpId, ...]
    sdk_hosts: tuple[tuple[IdpId, str], ...]
    _by_scope: dict = field(repr=False, compare=False)

    def match_endpoint(self, url: str) -> IdpId | None:
        """First pattern (in file order) that matches the full URL wins."""
        for entry in self.endpoint_patterns:
            if entry.matches(url):
                return entry.idp
        return None

    def describe(self, idp: IdpId, scope_token: str) -> Permission:
        """Return the cataloged permission, or a synthesized placeholder.

        Unknown tokens are a value, not an error: they come back flagged
        unrecognized with an Extended category and unknown optionality.
        """
        found = self._by_scope.get((idp.name, scope_token))
        if found is not None:
            return found
        return Permission(
            idp=idp,
            scope_token=scope_token,
            description=f"Unrecognized permission: {scope_token}",
            category=PermissionCategory.EXTENDED,
            optional=None,
            recognized=False,
        )

    def display_order_for(self, idps) -> list[IdpId]:
        """Sort providers by the registry's display order; strangers go last."""
        present = set(idps)
        ordered = [idp for idp in self.idp_display_order if idp in present]
        ordered.extend(sorted(present - set(self.idp_display_order)))
        return ordered

    def sdk_idp_for_host(self, host: str) -> IdpId | None:
        host = host.lower()
        for idp, sdk_host in self.sdk_hosts:
            if host == sdk_host:
                return idp
        return None


def match_idp_endpoint(registry: Registry, url: str) -> IdpId | None:
    return registry.match_endpoint(url)


def describe_scope(registry: Registry, idp: IdpId, scope_token: str) -> Permission:
    return registry.describe(idp, scope_token)


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise RegistryParseError(f"{where}: missing key {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise RegistryParseError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def load_registry(source: IO[bytes] | IO[str]) -> Registry:
    """Load and fully validate a registry document from a readable stream.

    Violations are reported with their field locations. Raises
    :class:`RegistryParseError`, :class:`DuplicateScope` or
    :class:`BadPattern`.
    """
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise RegistryParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise RegistryParseError("registry document must be a JSON object")

    endpoints_raw = _require(doc, "endpoints", list, "registry")
    permissions_raw = _require(doc, "permissions", list, "registry")
    order_raw = _require(doc, "display_order", list, "registry")

    patterns: list[EndpointPattern] = []
    for i, entry in enumerate(endpoints_raw):
        where = f"endpoints[{i}]"
        if not isinstance(entry, dict):
            raise RegistryParseError(f"{where}: expected an object")
        idp = IdpId(_require(entry, "idp", str, where))
        pattern = _require(entry, "pattern", str, where)
        try:
            regex = re.compile(pattern)
        except re.error as exc:
            raise BadPattern(f"{where}.pattern: {pattern!r} does not compile: {exc}") from exc
        patterns.append(EndpointPattern(idp=idp, pattern=pattern, regex=regex))

    permissions: list[Permission] = []
    by_scope: dict[tuple[str, str], Permission] = {}
    for i, entry in enumerate(permissions_raw):
        where = f"permissions[{i}]"
        if not isinstance(entry, dict):
            raise RegistryParseError(f"{where}: expected an object")
        idp = IdpId(_require(entry, "idp", str, where))
        scope = _require(entry, "scope", str, where)
        description = _require(entry, "description", str, where)
        if not description.strip():
            raise RegistryParseError(f"{where}.description: must not be empty")
        category_raw = _require(entry, "category", str, where)
        try:
            category = PermissionCategory(category_raw.lower())
        except ValueError:
            raise RegistryParseError(f"{where}.category: {category_raw!r} is not basic/extended") from None
        optional = _require(entry, "optional", bool, where)
        privacy_note = entry.get("privacy_note")
        if privacy_note is not None and not isinstance(privacy_note, str):
            raise RegistryParseError(f"{where}.privacy_note: expected string")
        permission = Permission(
            idp=idp,
            scope_token=scope,
            description=description,
            category=category,
            optional=optional,
            privacy_note=privacy_note,
        )
        key = (idp.name, scope)
        if key in by_scope:
            raise DuplicateScope(f"{where}: duplicate (idp, scope) pair {key}")
        by_scope[key] = permission
        permissions.append(permission)

    display_order = tuple(IdpId(name) for name in order_raw if isinstance(name, str))
    if len(display_order) != len(order_raw):
        raise RegistryParseError("display_order: entries must be strings")
    if display_order[: len(BUILTIN_IDPS)] != BUILTIN_IDPS:
        raise RegistryParseError(
            "display_order: must start with facebook, google, apple in that order"
        )
    if len(set(display_order)) != len(display_order):
        raise RegistryParseError("display_order: duplicate provider names")

    pattern_idps = {p.idp for p in patterns}
    for i, permission in enumerate(permissions):
        if permission.idp not in pattern_idps:
            raise RegistryParseError(
                f"permissions[{i}]: provider {permission.idp.name!r} has no endpoint pattern"
            )

    sdk_hosts: list[tuple[IdpId, str]] = []
    if "sdk_hosts" in doc:
        hosts_raw = _require(doc, "sdk_hosts", list, "registry")
        for i, entry in enumerate(hosts_raw):
            where = f"sdk_hosts[{i}]"
            if not isinstance(entry, dict):
                raise RegistryParseError(f"{where}: expected an object")
            sdk_hosts.append(
                (IdpId(_require(entry, "idp", str, where)), _require(entry, "host", str, where).lower())
            )
    else:
        sdk_hosts = [(IdpId(name), host) for name, host in DEFAULT_SDK_HOSTS]

    return Registry(
        endpoint_patterns=tuple(patterns),
        permissions=tuple(permissions),
        idp_display_order=display_order,
        sdk_hosts=tuple(sdk_hosts),
        _by_scope=by_scope,
    )


def load_registry_path(path) -> Registry:
    with open(path, "rb") as handle:
        return load_registry(handle)


def load_default_registry() -> Registry:
    """Load the registry shipped with the package."""
    with resources.files("speye").joinpath("data/registry.json").open("rb") as handle:
        return load_registry(handle)
