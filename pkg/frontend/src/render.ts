/**
 * Pure rendering: API JSON in, HTML string out. The same payload always
 * produces the same markup, which keeps the view trivially testable and the
 * DOM a function of the data.
 *
 * No option is ranked or highlighted as a winner; each provider column only
 * carries a neutral permission-count chip.
 */

import type {
  ApiErrorJson,
  FocusedReportJson,
  IdpResultJson,
  MissJson,
  PermissionJson,
  ScanReportJson,
} from './types.js';

export function escapeHtml(value: string): string {
  return value
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;')
    .replaceAll("'", '&#39;');
}

const FLOW_LABELS: Record<string, string> = {
  authorization_code: 'authorization code flow',
  implicit: 'implicit flow',
  oidc_variant: 'OIDC flow',
  unknown: 'flow unknown',
};

const SOURCE_LABELS: Record<string, string> = {
  driven_redirect: 'via redirect',
  static_sdk_literal: 'statically observed SDK call',
  focused_url: 'from authorization URL',
};

const MISS_LABELS: Record<string, string> = {
  non_redirect: 'no redirect',
  csrf_token_required: 'CSRF token required',
  fetch_metadata_blocked: 'blocked (fetch metadata)',
  timeout: 'timed out',
  depth_exceeded: 'too many redirects',
  network_error: 'network error',
};

function flowLabel(result: IdpResultJson): string {
  const base = FLOW_LABELS[result.flow.kind] ?? result.flow.kind;
  if (result.flow.kind === 'oidc_variant' && result.flow.response_type) {
    return `${base} (${escapeHtml(result.flow.response_type)})`;
  }
  return base;
}

function titleCase(name: string): string {
  return name.charAt(0).toUpperCase() + name.slice(1);
}

function renderPermission(result: IdpResultJson, permission: PermissionJson): string {
  const optional = permission.optional === true;
  const toggleable = optional && result.request !== null;
  const marks: string[] = [];
  if (permission.optional === true) marks.push('<span class="mark optional">optional</span>');
  if (permission.optional === false) marks.push('<span class="mark required">required</span>');
  if (permission.optional === null) marks.push('<span class="mark unknown">optionality unknown</span>');
  if (!permission.recognized) marks.push('<span class="mark unrecognized">unrecognized</span>');
  return `
    <li class="permission${permission.recognized ? '' : ' unrecognized'}" data-scope="${escapeHtml(permission.scope)}">
      <label>
        <input type="checkbox" class="optout-toggle"
          data-idp="${escapeHtml(result.idp)}" data-scope="${escapeHtml(permission.scope)}"
          ${toggleable ? '' : 'disabled'}>
        <code class="scope">${escapeHtml(permission.scope)}</code>
        ${marks.join(' ')}
      </label>
      <p class="description">${escapeHtml(permission.description)}</p>
    </li>`;
}

function renderGroup(result: IdpResultJson, category: 'basic' | 'extended'): string {
  const members = result.permissions.filter((p) => p.category === category);
  if (members.length === 0) {
    return '';
  }
  return `
    <div class="permission-group ${category}">
      <h4>${category === 'basic' ? 'Basic' : 'Extended'}</h4>
      <ul>${members.map((p) => renderPermission(result, p)).join('')}</ul>
    </div>`;
}

export function renderIdpColumn(result: IdpResultJson): string {
  const relayBadge = result.privacy_notes.length
    ? `<span class="badge relay-badge" title="${escapeHtml(result.privacy_notes.join(' '))}">email relay available</span>`
    : '';
  return `
    <article class="idp-column" data-idp="${escapeHtml(result.idp)}">
      <header>
        <h3>${escapeHtml(titleCase(result.idp))}</h3>
        <span class="chip permission-count">${result.permissions.length} permission${
          result.permissions.length === 1 ? '' : 's'
        }</span>
        ${relayBadge}
        <p class="meta">${flowLabel(result)} &middot; ${SOURCE_LABELS[result.source] ?? escapeHtml(result.source)}</p>
      </header>
      ${renderGroup(result, 'basic')}
      ${renderGroup(result, 'extended')}
      <div class="optout-preview" data-idp="${escapeHtml(result.idp)}" hidden></div>
    </article>`;
}

function renderMiss(miss: MissJson): string {
  const label = MISS_LABELS[miss.reason] ?? miss.reason;
  const where = `${miss.candidate.matched_string} (${miss.candidate.element_kind})`;
  return `
    <li class="miss" data-reason="${escapeHtml(miss.reason)}">
      <span class="miss-reason">${escapeHtml(label)}</span>
      <span class="miss-candidate">${escapeHtml(where)}</span>
      <p class="miss-detail">${escapeHtml(miss.detail)}</p>
    </li>`;
}

export function renderMissPanel(misses: MissJson[]): string {
  if (misses.length === 0) {
    return '';
  }
  return `
    <section class="miss-panel">
      <h3>Could not extract</h3>
      <ul>${misses.map(renderMiss).join('')}</ul>
    </section>`;
}

export function renderScanReport(report: ScanReportJson): string {
  const pattern = report.site_pattern
    ? `<span class="chip pattern">${escapeHtml(report.site_pattern.replaceAll('_', '-'))}</span>`
    : '';
  const columns = report.idp_results.map(renderIdpColumn).join('');
  const empty =
    report.idp_results.length === 0
      ? '<p class="empty">No SSO permission requests could be extracted from this page.</p>'
      : '';
  return `
    <div class="report comparative">
      <header class="report-header">
        <h2>${escapeHtml(report.rp_origin)}</h2>
        ${pattern}
      </header>
      <section class="idp-grid" data-columns="${report.idp_results.length}">${columns}</section>
      ${empty}
      ${renderMissPanel(report.misses)}
      <footer class="disclaimer">${escapeHtml(report.disclaimer)}</footer>
    </div>`;
}

export function renderFocusedReport(report: FocusedReportJson): string {
  return `
    <div class="report focused">
      <header class="report-header">
        <h2>${escapeHtml(titleCase(report.idp))} login for ${escapeHtml(report.rp_identifier)}</h2>
      </header>
      <section class="idp-grid" data-columns="1">${renderIdpColumn(report.result)}</section>
      <footer class="disclaimer">${escapeHtml(report.disclaimer)}</footer>
    </div>`;
}

export function renderError(error: ApiErrorJson): string {
  return `
    <div class="error-banner" data-code="${escapeHtml(error.code)}">
      <strong>${escapeHtml(error.code)}</strong>: ${escapeHtml(error.message)}
    </div>`;
}

export function renderPending(url: string): string {
  return `<div class="pending">Scanning ${escapeHtml(url)} &hellip;</div>`;
}
