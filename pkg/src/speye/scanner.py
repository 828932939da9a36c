"""Static analysis of a login page: SSO candidates, code pattern, SDK scopes.

Detection is read-only — the page is never mutated and script content is
never executed; SDK scope extraction only reports string literals found in
inline scripts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from urllib.parse import urljoin, urlsplit

from .dom import HtmlElement, document_base_url, node_path, parse_html
from .protocol import IdpId, split_scope_tokens
from .registry import Registry


class NotHtmlContent(Exception):
    """The fetched body is not an HTML document."""


#: Login-affordance trigger strings, matched as substrings of normalized text.
TRIGGER_STRINGS = (
    "sign in with",
    "sign in",
    "continue with",
    "log in with",
    "login with",
    "login via",
    "connect using",
    "or use",
)

# Longest first so "sign in with" wins over its prefix "sign in".
_TRIGGERS_BY_LENGTH = tuple(sorted(TRIGGER_STRINGS, key=len, reverse=True))

#: Tags whose direct text is checked for trigger strings.
TEXT_TRIGGER_TAGS = {"span", "div", "a", "small", "button", "p"}

#: Matched-string label for candidates detected by an IdP URL instead of text.
IDP_LINK_MATCH = "idp link"

_IDP_NAME_WORDS = ("facebook", "google", "apple")

_WS = re.compile(r"\s+")


class AttributeSource(str, Enum):
    HREF_LINK = "href_link"
    FORM_SUBMIT = "form_submit"
    CLICK_HANDLER = "click_handler"
    SDK_CALL = "sdk_call"
    IFRAME_SRC = "iframe_src"
    TITLE_ATTR = "title_attr"


class PatternClass(str, Enum):
    HTML_EMBEDDED = "html_embedded"
    SCRIPT_DRIVEN = "script_driven"
    SDK_BASED = "sdk_based"
    MIXED = "mixed"


@dataclass(frozen=True)
class FormDescriptor:
    """A form submission target: action URL, method and ordered fields,
    including hidden inputs and the SSO-selecting control's value."""

    action: str
    method: str
    fields: tuple[tuple[str, str], ...]

    def to_dict(self) -> dict:
        return {"action": self.action, "method": self.method, "fields": [list(f) for f in self.fields]}


@dataclass(frozen=True)
class SsoCandidate:
    """A detected login affordance: what matched, where, and its target."""

    matched_string: str
    element_kind: str
    attribute_source: AttributeSource
    target: str | FormDescriptor
    idp_hint: IdpId | None
    dom_locator: str

    def target_dict(self):
        return self.target.to_dict() if isinstance(self.target, FormDescriptor) else self.target

    def to_dict(self) -> dict:
        return {
            "matched_string": self.matched_string,
            "element_kind": self.element_kind,
            "attribute_source": self.attribute_source.value,
            "target": self.target_dict(),
            "idp_hint": self.idp_hint.name if self.idp_hint else None,
            "dom_locator": self.dom_locator,
        }


@dataclass(frozen=True)
class SdkScopeFinding:
    """Scope tokens found as string literals in an inline IdP SDK call."""

    idp: IdpId
    scopes: tuple[str, ...]
    evidence: str


def normalize_text(text: str) -> str:
    return _WS.sub(" ", text).strip().lower()


def find_trigger(text: str) -> str | None:
    normalized = normalize_text(text)
    if not normalized:
        return None
    for trigger in _TRIGGERS_BY_LENGTH:
        if trigger in normalized:
            return trigger
    return None


def ensure_html(content_type: str | None) -> None:
    """Reject non-HTML content types before parsing."""
    if content_type is None:
        return
    mime = content_type.split(";")[0].strip().lower()
    if mime and mime not in ("text/html", "application/xhtml+xml"):
        raise NotHtmlContent(f"expected an HTML document, got {mime}")


def parse_page(body: str | bytes, content_type: str | None = None) -> HtmlElement:
    """Parse fetched page content, rejecting non-HTML content types."""
    ensure_html(content_type)
    if isinstance(body, bytes):
        body = body.decode("utf-8", errors="replace")
    return parse_html(body)


def _usable_href(value: str | None) -> str | None:
    if not value:
        return None
    stripped = value.strip()
    if not stripped or stripped == "#" or stripped.lower().startswith("javascript:"):
        return None
    return stripped


def _nearest_anchor(node: HtmlElement) -> HtmlElement | None:
    """Self, then nearest enclosing, then first descendant anchor with a
    usable href."""
    if node.tag == "a" and _usable_href(node.get("href")):
        return node
    for ancestor in node.ancestors():
        if ancestor.tag == "a" and _usable_href(ancestor.get("href")):
            return ancestor
    for descendant in node.iter_elements():
        if descendant is not node and descendant.tag == "a" and _usable_href(descendant.get("href")):
            return descendant
    return None


def _enclosing_form(node: HtmlElement) -> HtmlElement | None:
    if node.tag == "form":
        return node
    for ancestor in node.ancestors():
        if ancestor.tag == "form":
            return ancestor
    return None


def _onclick(node: HtmlElement) -> str | None:
    if node.get("onclick"):
        return node.get("onclick")
    for ancestor in node.ancestors():
        if ancestor.get("onclick"):
            return ancestor.get("onclick")
    return None


_TEXT_INPUT_TYPES = {"text", "email", "tel", "url", "search", "number"}


def _submit_control(node: HtmlElement) -> HtmlElement | None:
    """The named button/submit control the match belongs to, if any."""
    for candidate in (node, *node.ancestors()):
        if candidate.tag == "button" and candidate.get("name"):
            return candidate
        if (
            candidate.tag == "input"
            and (candidate.get("type") or "").lower() in ("submit", "button")
            and candidate.get("name")
        ):
            return candidate
    return None


def build_form_descriptor(form: HtmlElement, base_url: str, matched: HtmlElement) -> FormDescriptor:
    action = urljoin(base_url, form.get("action") or "")
    method = (form.get("method") or "GET").strip().upper()
    if method not in ("GET", "POST"):
        method = "GET"
    control = _submit_control(matched)
    fields: list[tuple[str, str]] = []
    for node in form.iter_elements():
        if node is control:
            fields.append((node.get("name") or "", node.get("value") or ""))
            continue
        if node.tag != "input":
            continue
        name = node.get("name")
        if not name:
            continue
        input_type = (node.get("type") or "text").lower()
        if input_type == "hidden" or input_type in _TEXT_INPUT_TYPES:
            fields.append((name, node.get("value") or ""))
        elif input_type in ("radio", "checkbox") and node.get("checked") is not None:
            fields.append((name, node.get("value") or "on"))
    return FormDescriptor(action=action, method=method, fields=tuple(fields))


_SDK_CALL_PATTERNS: tuple[tuple[str, re.Pattern], ...] = (
    ("facebook", re.compile(r"\bFB\.login\s*\(")),
    ("google", re.compile(r"\bgapi\.auth2\.(?:init|authorize)\s*\(")),
    ("google", re.compile(r"\bgoogle\.accounts\.oauth2\.init(?:Token|Code)Client\s*\(")),
    ("apple", re.compile(r"\bAppleID\.auth\.(?:init|signIn)\s*\(")),
)

_SDK_CALL_ANY = re.compile("|".join(p.pattern for _, p in _SDK_CALL_PATTERNS))


def _match_registry(registry: Registry | None, url: str | None) -> IdpId | None:
    if registry is None or not url:
        return None
    return registry.match_endpoint(url)


def _infer_idp_hint(
    registry: Registry | None,
    target_url: str | None,
    node: HtmlElement,
    matched_attr_values: list[str],
) -> IdpId | None:
    """Target-host registry match first, then a unique IdP name in the text."""
    by_target = _match_registry(registry, target_url)
    if by_target is not None:
        return by_target
    haystack = normalize_text(" ".join([node.text(), *matched_attr_values]))
    named = [name for name in _IDP_NAME_WORDS if name in haystack]
    if len(named) == 1:
        return IdpId(named[0])
    return None


def _resolve_candidate_target(
    node: HtmlElement, base_url: str
) -> tuple[AttributeSource, str | FormDescriptor] | None:
    anchor = _nearest_anchor(node)
    if anchor is not None:
        return AttributeSource.HREF_LINK, urljoin(base_url, _usable_href(anchor.get("href")))
    form = _enclosing_form(node)
    if form is not None:
        return AttributeSource.FORM_SUBMIT, build_form_descriptor(form, base_url, node)
    handler = _onclick(node)
    if handler is not None:
        if _SDK_CALL_ANY.search(handler):
            return AttributeSource.SDK_CALL, handler
        return AttributeSource.CLICK_HANDLER, handler
    return None


def find_sso_candidates(
    document: HtmlElement,
    base_url: str,
    registry: Registry | None = None,
    deduplicate: bool = True,
) -> list[SsoCandidate]:
    """Locate SSO login affordances in a parsed page.

    A node qualifies when its direct text or a mapped attribute contains a
    trigger string (after lowercase folding and whitespace normalization), or
    when its link/iframe/title URL matches an IdP endpoint pattern. Each
    match resolves to an actionable target; candidates sharing the same
    (idp hint, target) collapse to the first unless ``deduplicate`` is off.
    """
    base_url = document_base_url(document, base_url)
    candidates: list[SsoCandidate] = []

    for node in document.iter_elements():
        matched: str | None = None
        matched_attr_values: list[str] = []
        forced: tuple[AttributeSource, str] | None = None

        if node.tag in TEXT_TRIGGER_TAGS:
            matched = find_trigger(node.own_text())

        if matched is None and node.tag == "span" and node.get("data-text"):
            matched = find_trigger(node.get("data-text"))
            if matched:
                matched_attr_values.append(node.get("data-text"))
        if matched is None and node.tag == "a" and node.get("title"):
            matched = find_trigger(node.get("title"))
            if matched:
                matched_attr_values.append(node.get("title"))
        # Some buttons carry their label in a value attribute, not text.
        if matched is None and node.tag in ("button", "input") and node.get("value"):
            matched = find_trigger(node.get("value"))
            if matched:
                matched_attr_values.append(node.get("value"))

        if matched is None:
            # IdP-link detection: the URL itself gives the login option away.
            if node.tag == "a":
                title_url = (node.get("title") or "").strip()
                if title_url and _match_registry(registry, title_url) is not None:
                    matched = IDP_LINK_MATCH
                    forced = (AttributeSource.TITLE_ATTR, title_url)
                else:
                    href = _usable_href(node.get("href"))
                    if href is not None:
                        absolute = urljoin(base_url, href)
                        if _match_registry(registry, absolute) is not None:
                            matched = IDP_LINK_MATCH
            elif node.tag == "iframe":
                src = (node.get("src") or "").strip()
                if src:
                    absolute = urljoin(base_url, src)
                    if _match_registry(registry, absolute) is not None:
                        matched = IDP_LINK_MATCH
                        forced = (AttributeSource.IFRAME_SRC, absolute)

        if matched is None:
            continue

        resolved = forced or _resolve_candidate_target(node, base_url)
        if resolved is None:
            continue
        source, target = resolved

        if isinstance(target, FormDescriptor):
            target_url = target.action
        elif source in (AttributeSource.HREF_LINK, AttributeSource.IFRAME_SRC, AttributeSource.TITLE_ATTR):
            target_url = target
        else:
            target_url = None
        candidates.append(
            SsoCandidate(
                matched_string=matched,
                element_kind=node.tag,
                attribute_source=source,
                target=target,
                idp_hint=_infer_idp_hint(registry, target_url, node, matched_attr_values),
                dom_locator=node_path(node),
            )
        )

    if not deduplicate:
        return candidates
    seen: set = set()
    unique: list[SsoCandidate] = []
    for candidate in candidates:
        key = (candidate.idp_hint, candidate.target)
        if key in seen:
            continue
        seen.add(key)
        unique.append(candidate)
    return unique


def _script_import_idps(document: HtmlElement, registry: Registry) -> set[IdpId]:
    found: set[IdpId] = set()
    for script in document.find_all("script"):
        src = script.get("src")
        if not src:
            continue
        host = (urlsplit(src).hostname or "").lower()
        idp = registry.sdk_idp_for_host(host)
        if idp is not None:
            found.add(idp)
    return found


def classify_pattern(
    document: HtmlElement,
    candidates: list[SsoCandidate],
    registry: Registry,
) -> tuple[PatternClass | None, dict[SsoCandidate, PatternClass]]:
    """Classify each candidate's client-side code pattern and the site's.

    Link/form/iframe/title targets are HTML-embedded; click handlers are
    script-driven unless a known IdP SDK import pairs with a same-IdP
    candidate, which makes them SDK-based. The site class is the single
    shared class, or Mixed when candidates disagree; None without candidates.
    """
    sdk_idps = _script_import_idps(document, registry)
    per_candidate: dict[SsoCandidate, PatternClass] = {}
    for candidate in candidates:
        if candidate.attribute_source in (
            AttributeSource.HREF_LINK,
            AttributeSource.FORM_SUBMIT,
            AttributeSource.IFRAME_SRC,
            AttributeSource.TITLE_ATTR,
        ):
            per_candidate[candidate] = PatternClass.HTML_EMBEDDED
        elif candidate.attribute_source is AttributeSource.SDK_CALL:
            per_candidate[candidate] = PatternClass.SDK_BASED
        elif candidate.idp_hint is not None and candidate.idp_hint in sdk_idps:
            per_candidate[candidate] = PatternClass.SDK_BASED
        else:
            per_candidate[candidate] = PatternClass.SCRIPT_DRIVEN

    classes = set(per_candidate.values())
    if not classes:
        return None, per_candidate
    if len(classes) == 1:
        return next(iter(classes)), per_candidate
    return PatternClass.MIXED, per_candidate


def _balanced_call_args(text: str, open_paren: int) -> str:
    """The argument text of a call, given the index of its opening paren.

    Tracks nesting and skips string literals; an unbalanced call returns the
    remainder of the script.
    """
    depth = 0
    quote: str | None = None
    i = open_paren
    while i < len(text):
        ch = text[i]
        if quote is not None:
            if ch == "\\":
                i += 2
                continue
            if ch == quote:
                quote = None
        elif ch in "'\"`":
            quote = ch
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                return text[open_paren + 1 : i]
        i += 1
    return text[open_paren + 1 :]


_SCOPE_LITERAL = re.compile(r"""(?<![\w$])['"]?scope['"]?\s*:\s*(['"])((?:\\.|(?!\1).)*)\1""")


def _literal_scope_value(args: str) -> str | None:
    match = _SCOPE_LITERAL.search(args)
    if not match:
        return None
    rest = args[match.end():].lstrip()
    if rest.startswith("+"):
        # Concatenation: the full value is built at runtime.
        return None
    return match.group(2)


def extract_sdk_scopes(document: HtmlElement) -> list[SdkScopeFinding]:
    """Literal scope arguments of IdP SDK login calls in inline scripts.

    Dynamically-constructed arguments are never evaluated; only quoted
    string literals count.
    """
    findings: list[SdkScopeFinding] = []
    seen: set[tuple[str, tuple[str, ...]]] = set()
    inline_scripts = [s for s in document.find_all("script") if not s.get("src")]
    for index, script in enumerate(inline_scripts):
        text = script.text()
        for idp_name, call_pattern in _SDK_CALL_PATTERNS:
            for match in call_pattern.finditer(text):
                args = _balanced_call_args(text, match.end() - 1)
                literal = _literal_scope_value(args)
                if literal is None:
                    continue
                scopes = tuple(split_scope_tokens(literal))
                if not scopes:
                    continue
                key = (idp_name, scopes)
                if key in seen:
                    continue
                seen.add(key)
                findings.append(
                    SdkScopeFinding(
                        idp=IdpId(idp_name),
                        scopes=scopes,
                        evidence=f"script[{index}] offset {match.start()}",
                    )
                )
    return findings


def find_csrf_meta_tags(document: HtmlElement) -> list[str]:
    """Names of meta tags that look like CSRF token carriers."""
    names = []
    for meta in document.find_all("meta"):
        name = (meta.get("name") or meta.get("property") or "").lower()
        if "csrf" in name and meta.get("content"):
            names.append(name)
    return names
