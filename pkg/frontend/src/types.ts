/** JSON shapes exactly as the local scan service emits them. */

export interface PermissionJson {
  idp: string;
  scope: string;
  description: string;
  category: 'basic' | 'extended';
  optional: boolean | null;
  recognized: boolean;
  privacy_note?: string;
}

export interface FlowJson {
  kind: string;
  response_type?: string;
}

export interface AuthorizationRequestJson {
  endpoint: string;
  raw_url: string;
  idp: string | null;
  client_id: string | null;
  redirect_uri: string | null;
  response_type: string | null;
  scopes: string[];
  state: string | null;
  nonce: string | null;
  extra_params: [string, string][];
}

export interface IdpResultJson {
  idp: string;
  request: AuthorizationRequestJson | null;
  permissions: PermissionJson[];
  flow: FlowJson;
  source: string;
  privacy_notes: string[];
}

export interface CandidateJson {
  matched_string: string;
  element_kind: string;
  attribute_source: string;
  target: unknown;
  idp_hint: string | null;
  dom_locator: string;
}

export interface MissJson {
  candidate: CandidateJson;
  reason: string;
  detail: string;
}

export interface ScanReportJson {
  rp_origin: string;
  scanned_at?: string;
  site_pattern?: string;
  idp_results: IdpResultJson[];
  misses: MissJson[];
  disclaimer: string;
}

export interface OptOutPreviewJson {
  scope: string;
  url: string;
}

export interface FocusedReportJson {
  idp: string;
  rp_identifier: string;
  result: IdpResultJson;
  optout_previews: OptOutPreviewJson[];
  disclaimer: string;
}

export interface ApiErrorJson {
  code: string;
  message: string;
}

export function isFocusedReport(
  report: ScanReportJson | FocusedReportJson,
): report is FocusedReportJson {
  return 'rp_identifier' in report;
}
