"""Assembly and rendering of Focused and Comparative permission reports.

Reports are deterministic: providers follow the registry display order,
permissions sort basic-before-extended then by token, and JSON rendering is
canonical (sorted keys, invariant array order, no timestamps in
deterministic mode).
"""

from __future__ import annotations

import json
import textwrap
from dataclasses import dataclass
from enum import Enum

from .protocol import AuthorizationRequest, FlowKind, FlowName, IdpId, classify_flow
from .registry import Permission, PermissionCategory, Registry
from .scanner import PatternClass, SdkScopeFinding, SsoCandidate

#: Fixed warning attached to every report: the provider has the last word.
DISCLAIMER = (
    "Permissions shown are those the site requests; the identity provider may "
    "prune or override them at login time."
)

RENDER_WIDTH = 100


class ResultSource(str, Enum):
    DRIVEN_REDIRECT = "driven_redirect"
    STATIC_SDK_LITERAL = "static_sdk_literal"
    FOCUSED_URL = "focused_url"


class MissReason(str, Enum):
    NON_REDIRECT = "non_redirect"
    CSRF_TOKEN_REQUIRED = "csrf_token_required"
    FETCH_METADATA_BLOCKED = "fetch_metadata_blocked"
    TIMEOUT = "timeout"
    DEPTH_EXCEEDED = "depth_exceeded"
    NETWORK_ERROR = "network_error"


@dataclass(frozen=True)
class ScanMiss:
    """A candidate whose authorization request could not be extracted."""

    candidate: SsoCandidate
    reason: MissReason
    detail: str

    def to_dict(self) -> dict:
        return {
            "candidate": self.candidate.to_dict(),
            "reason": self.reason.value,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class IdpResult:
    """Extracted permissions for one provider, however they were obtained."""

    idp: IdpId
    request: AuthorizationRequest | None
    permissions: tuple[Permission, ...]
    flow: FlowKind
    source: ResultSource
    privacy_notes: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "idp": self.idp.name,
            "request": self.request.to_dict() if self.request else None,
            "permissions": [p.to_dict() for p in self.permissions],
            "flow": self.flow.to_dict(),
            "source": self.source.value,
            "privacy_notes": list(self.privacy_notes),
        }


@dataclass(frozen=True)
class ScanReport:
    """Comparative scan result for one relying-party page."""

    rp_origin: str
    scanned_at: str | None
    site_pattern: PatternClass | None
    idp_results: tuple[IdpResult, ...]
    misses: tuple[ScanMiss, ...]
    disclaimer: str = DISCLAIMER

    def to_dict(self) -> dict:
        out: dict = {
            "rp_origin": self.rp_origin,
            "idp_results": [r.to_dict() for r in self.idp_results],
            "misses": [m.to_dict() for m in self.misses],
            "disclaimer": self.disclaimer,
        }
        if self.scanned_at is not None:
            out["scanned_at"] = self.scanned_at
        if self.site_pattern is not None:
            out["site_pattern"] = self.site_pattern.value
        return out


@dataclass(frozen=True)
class FocusedReport:
    """Permissions parsed from one provider's authorization URL in place."""

    idp: IdpId
    rp_identifier: str
    result: IdpResult
    optout_previews: tuple[tuple[str, str], ...]
    disclaimer: str = DISCLAIMER

    def to_dict(self) -> dict:
        return {
            "idp": self.idp.name,
            "rp_identifier": self.rp_identifier,
            "result": self.result.to_dict(),
            "optout_previews": [{"scope": s, "url": u} for s, u in self.optout_previews],
            "disclaimer": self.disclaimer,
        }


def build_idp_result(
    idp: IdpId,
    scopes,
    registry: Registry,
    source: ResultSource,
    request: AuthorizationRequest | None = None,
) -> IdpResult:
    """Map scope tokens onto permissions: deduplicated, basic first, then by
    token; privacy notes bubble up from the included permissions."""
    permissions: list[Permission] = []
    seen: set[str] = set()
    for token in scopes:
        if token in seen:
            continue
        seen.add(token)
        permissions.append(registry.describe(idp, token))
    permissions.sort(
        key=lambda p: (0 if p.category is PermissionCategory.BASIC else 1, p.scope_token)
    )
    notes: list[str] = []
    for permission in permissions:
        if permission.privacy_note and permission.privacy_note not in notes:
            notes.append(permission.privacy_note)
    flow = classify_flow(request) if request is not None else FlowKind(FlowName.UNKNOWN)
    return IdpResult(
        idp=idp,
        request=request,
        permissions=tuple(permissions),
        flow=flow,
        source=source,
        privacy_notes=tuple(notes),
    )


def build_comparative_report(
    rp_origin: str,
    site_pattern: PatternClass | None,
    driven: list[tuple[IdpId, AuthorizationRequest]],
    findings: list[SdkScopeFinding],
    misses: list[ScanMiss],
    registry: Registry,
    scanned_at: str | None = None,
) -> ScanReport:
    """Assemble one scan's chains, static findings and misses into a report.

    A driven request wins over a static SDK finding for the same provider;
    providers appear in registry display order.
    """
    results: dict[IdpId, IdpResult] = {}
    for idp, request in driven:
        if idp in results:
            continue
        results[idp] = build_idp_result(
            idp, request.scopes, registry, ResultSource.DRIVEN_REDIRECT, request=request
        )
    merged_scopes: dict[IdpId, list[str]] = {}
    for finding in findings:
        if finding.idp in results:
            continue
        bucket = merged_scopes.setdefault(finding.idp, [])
        bucket.extend(s for s in finding.scopes if s not in bucket)
    for idp, scopes in merged_scopes.items():
        results[idp] = build_idp_result(idp, scopes, registry, ResultSource.STATIC_SDK_LITERAL)

    ordered = tuple(results[idp] for idp in registry.display_order_for(results))
    return ScanReport(
        rp_origin=rp_origin,
        scanned_at=scanned_at,
        site_pattern=site_pattern,
        idp_results=ordered,
        misses=tuple(misses),
    )


def render_json(report: ScanReport | FocusedReport) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


_FLOW_LABELS = {
    FlowName.AUTHORIZATION_CODE: "authorization code flow",
    FlowName.IMPLICIT: "implicit flow",
    FlowName.UNKNOWN: "flow unknown",
}

_SOURCE_LABELS = {
    ResultSource.DRIVEN_REDIRECT: "driven redirect",
    ResultSource.STATIC_SDK_LITERAL: "statically observed SDK call",
    ResultSource.FOCUSED_URL: "authorization URL",
}


def _flow_label(flow: FlowKind) -> str:
    if flow.name is FlowName.OIDC_VARIANT:
        return f"OIDC flow ({flow.response_type})" if flow.response_type else "OIDC flow"
    return _FLOW_LABELS[flow.name]


def _wrap(text: str, indent: str) -> list[str]:
    return textwrap.wrap(
        text, width=RENDER_WIDTH, initial_indent=indent, subsequent_indent=indent
    ) or [indent.rstrip()]


def _permission_lines(permission: Permission) -> list[str]:
    if permission.optional is None:
        optionality = "optionality unknown"
    else:
        optionality = "optional" if permission.optional else "required"
    lines = [f"  {permission.scope_token}  [{permission.category.value}, {optionality}]"]
    lines.extend(_wrap(permission.description, "      "))
    return lines


def _result_lines(result: IdpResult) -> list[str]:
    title = result.idp.name.capitalize()
    lines = [f"== {title} ({_flow_label(result.flow)}; {_SOURCE_LABELS[result.source]})"]
    if not result.permissions:
        lines.append("  (no permissions requested)")
    for permission in result.permissions:
        lines.extend(_permission_lines(permission))
    for note in result.privacy_notes:
        lines.extend(_wrap(f"note: {note}", "  "))
    return lines


def _miss_lines(miss: ScanMiss) -> list[str]:
    candidate = miss.candidate
    target = candidate.target_dict()
    if isinstance(target, dict):
        target = f"{target['method']} {target['action']}"
    head = (
        f"  - {candidate.matched_string} ({candidate.element_kind}) -> {target}: "
        f"{miss.reason.value}"
    )
    lines = _wrap(head, "")
    lines.extend(_wrap(miss.detail, "      "))
    return lines


def render_text(report: ScanReport | FocusedReport) -> str:
    """Human-readable rendering for terminals, at most 100 columns wide."""
    lines: list[str] = []
    if isinstance(report, FocusedReport):
        lines.append(f"SSO permissions requested via {report.idp.name.capitalize()}")
        lines.append(f"Relying party: {report.rp_identifier}")
        lines.append("")
        lines.extend(_result_lines(report.result))
        if report.optout_previews:
            lines.append("")
            lines.append("Opt-out previews (authorization URL without that permission):")
            for scope, url in report.optout_previews:
                lines.extend(_wrap(f"- {scope}: {url}", "  "))
    else:
        lines.append(f"SSO permission comparison: {report.rp_origin}")
        if report.scanned_at:
            lines.append(f"Scanned at: {report.scanned_at}")
        if report.site_pattern is not None:
            lines.append(f"Site code pattern: {report.site_pattern.value.replace('_', '-')}")
        if not report.idp_results:
            lines.append("")
            lines.append("No SSO permission requests could be extracted.")
        for result in report.idp_results:
            lines.append("")
            lines.extend(_result_lines(result))
        lines.append("")
        if report.misses:
            lines.append("Misses:")
            for miss in report.misses:
                lines.extend(_miss_lines(miss))
        else:
            lines.append("Misses: none")
    lines.append("")
    lines.extend(_wrap(f"Note: {report.disclaimer}", ""))
    return "\n".join(lines) + "\n"
