import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';

import {
  escapeHtml,
  renderError,
  renderFocusedReport,
  renderScanReport,
} from '../src/render.js';
import type { FocusedReportJson, ScanReportJson } from '../src/types.js';

function loadFixture<T>(name: string): T {
  return JSON.parse(readFileSync(new URL(`./fixtures/${name}`, import.meta.url), 'utf-8')) as T;
}

const site11 = loadFixture<ScanReportJson>('scan_site11.json');
const site7 = loadFixture<ScanReportJson>('scan_site7.json');
const focusedFacebook = loadFixture<FocusedReportJson>('focused_facebook.json');

function columnOrder(html: string): string[] {
  return [...html.matchAll(/<article class="idp-column" data-idp="([^"]+)"/g)].map((m) => m[1]);
}

describe('comparative report rendering', () => {
  it('renders the recorded three-provider comparison as three columns in order', () => {
    const html = renderScanReport(site11);
    expect(columnOrder(html)).toEqual(['facebook', 'google', 'apple']);
    expect(html).toContain('data-columns="3"');
    expect(html).toContain('Facebook');
    expect(html).toContain('Google');
    expect(html).toContain('Apple');
  });

  it('shows a neutral permission-count chip per column and no winner styling', () => {
    const html = renderScanReport(site11);
    expect(html.match(/permission-count/g)).toHaveLength(3);
    expect(html).not.toContain('winner');
    expect(html).toContain('2 permissions');
    expect(html).toContain('3 permissions');
  });

  it('groups rows basic before extended within a column', () => {
    const html = renderScanReport(site11);
    const column = html.slice(html.indexOf('data-idp="facebook"'), html.indexOf('data-idp="google"'));
    expect(column).toContain('permission-group basic');
    const basicAt = column.indexOf('permission-group basic');
    expect(column.indexOf('public_profile')).toBeGreaterThan(basicAt);
  });

  it('badges the Apple column with the email relay note', () => {
    const html = renderScanReport(site11);
    const appleColumn = html.slice(html.indexOf('data-idp="apple"'));
    expect(appleColumn).toContain('relay-badge');
    const googleColumn = html.slice(html.indexOf('data-idp="google"'), html.indexOf('data-idp="apple"'));
    expect(googleColumn).not.toContain('relay-badge');
  });

  it('enables toggles only for optional permissions', () => {
    const html = renderScanReport(site11);
    const toggles = [...html.matchAll(/<input type="checkbox" class="optout-toggle"[^>]*data-scope="([^"]+)"[^>]*?(disabled)?>/gs)];
    const byScope = new Map(toggles.map((m) => [m[1], m[2] === 'disabled']));
    expect(byScope.get('email')).toBe(false);
    expect(byScope.get('public_profile')).toBe(true);
    expect(byScope.get('openid')).toBe(true);
  });

  it('renders the recorded all-miss scan as a miss panel with no columns', () => {
    const html = renderScanReport(site7);
    expect(columnOrder(html)).toEqual([]);
    expect(html).toContain('miss-panel');
    expect(html).toContain('data-reason="non_redirect"');
    expect(html).toContain('script-driven; static extraction only');
    expect(html).toContain('No SSO permission requests could be extracted');
  });

  it('always shows the disclaimer', () => {
    for (const report of [site11, site7]) {
      expect(renderScanReport(report)).toContain('prune or override');
    }
  });

  it('is a pure function of the payload', () => {
    expect(renderScanReport(site11)).toBe(renderScanReport(site11));
    expect(renderScanReport(site7)).toBe(renderScanReport(site7));
  });
});

describe('focused report rendering', () => {
  it('renders provider, relying party and one column', () => {
    const html = renderFocusedReport(focusedFacebook);
    expect(html).toContain('Facebook login for rp.example');
    expect(columnOrder(html)).toEqual(['facebook']);
    expect(html).toContain('user_photos');
  });
});

describe('error rendering and escaping', () => {
  it('renders the error banner with its code', () => {
    const html = renderError({ code: 'fetch_failed', message: 'boom' });
    expect(html).toContain('data-code="fetch_failed"');
    expect(html).toContain('boom');
  });

  it('escapes markup in payload text', () => {
    expect(escapeHtml('<img src=x onerror=1>')).not.toContain('<img');
    const poisoned = {
      ...site7,
      misses: site7.misses.map((miss) => ({ ...miss, detail: '<script>alert(1)</script>' })),
    };
    expect(renderScanReport(poisoned)).not.toContain('<script>alert(1)');
  });
});
