"""speye: see what a web single-sign-on login option will ask for, before logging in."""

from .protocol import (
    APPLE,
    BUILTIN_IDPS,
    FACEBOOK,
    GOOGLE,
    AuthorizationRequest,
    FlowKind,
    FlowName,
    IdpId,
    MalformedUrl,
    NotAnSsoRequest,
    OptOutNotPresent,
    classify_flow,
    parse_authorization_request,
    rewrite_without_scopes,
)
from .registry import (
    Permission,
    PermissionCategory,
    Registry,
    describe_scope,
    load_default_registry,
    load_registry,
    load_registry_path,
    match_idp_endpoint,
)
from .scanner import (
    AttributeSource,
    FormDescriptor,
    PatternClass,
    SdkScopeFinding,
    SsoCandidate,
    classify_pattern,
    extract_sdk_scopes,
    find_sso_candidates,
)
from .driver import (
    NotAnIdpUrl,
    PageFetchError,
    RedirectChain,
    ScanConfig,
    focused_scan,
    resolve_candidate,
    scan_rp,
)
from .report import (
    FocusedReport,
    IdpResult,
    MissReason,
    ResultSource,
    ScanMiss,
    ScanReport,
    build_comparative_report,
    render_json,
    render_text,
)

__version__ = "0.1.0"

__all__ = [
    "APPLE",
    "BUILTIN_IDPS",
    "FACEBOOK",
    "GOOGLE",
    "AttributeSource",
    "AuthorizationRequest",
    "FlowKind",
    "FlowName",
    "FocusedReport",
    "FormDescriptor",
    "IdpId",
    "IdpResult",
    "MalformedUrl",
    "MissReason",
    "NotAnIdpUrl",
    "NotAnSsoRequest",
    "OptOutNotPresent",
    "PageFetchError",
    "PatternClass",
    "Permission",
    "PermissionCategory",
    "RedirectChain",
    "Registry",
    "ResultSource",
    "ScanConfig",
    "ScanMiss",
    "ScanReport",
    "SdkScopeFinding",
    "SsoCandidate",
    "build_comparative_report",
    "classify_flow",
    "classify_pattern",
    "describe_scope",
    "extract_sdk_scopes",
    "find_sso_candidates",
    "focused_scan",
    "load_default_registry",
    "load_registry",
    "load_registry_path",
    "match_idp_endpoint",
    "parse_authorization_request",
    "render_json",
    "render_text",
    "resolve_candidate",
    "rewrite_without_scopes",
    "scan_rp",
    "__version__",
]
