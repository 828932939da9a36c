/**
 * View model and controller. One scan is in flight at a time; responses for
 * superseded scans are discarded by sequence number. Opt-out selections only
 * ever contain tokens the report marks optional, and the preview URL shown
 * for a provider is exactly the string the opt-out endpoint returned.
 */

import type { ScanServiceClient } from './api.js';
import { ApiRequestError } from './api.js';
import type {
  ApiErrorJson,
  FocusedReportJson,
  IdpResultJson,
  ScanReportJson,
} from './types.js';
import { isFocusedReport } from './types.js';

export interface ViewModel {
  enteredUrl: string;
  report: ScanReportJson | FocusedReportJson | null;
  pending: boolean;
  error: ApiErrorJson | null;
  optoutSelection: Map<string, Set<string>>;
  optoutPreview: Map<string, string>;
}

export type Mode = 'comparative' | 'focused';

function freshViewModel(): ViewModel {
  return {
    enteredUrl: '',
    report: null,
    pending: false,
    error: null,
    optoutSelection: new Map(),
    optoutPreview: new Map(),
  };
}

export function isAbsoluteHttpUrl(value: string): boolean {
  try {
    const parsed = new URL(value);
    return parsed.protocol === 'http:' || parsed.protocol === 'https:';
  } catch {
    return false;
  }
}

export function findResult(
  report: ScanReportJson | FocusedReportJson,
  idp: string,
): IdpResultJson | null {
  if (isFocusedReport(report)) {
    return report.result.idp === idp ? report.result : null;
  }
  return report.idp_results.find((result) => result.idp === idp) ?? null;
}

export class Dashboard {
  vm: ViewModel = freshViewModel();
  private sequence = 0;

  constructor(
    private readonly client: ScanServiceClient,
    private readonly onChange: (vm: ViewModel) => void = () => {},
  ) {}

  private publish(): void {
    this.onChange(this.vm);
  }

  private toError(cause: unknown): ApiErrorJson {
    if (cause instanceof ApiRequestError) {
      return { code: cause.code, message: cause.message };
    }
    return { code: 'internal', message: String(cause) };
  }

  async scan(url: string, mode: Mode = 'comparative'): Promise<void> {
    if (!isAbsoluteHttpUrl(url)) {
      // Inline validation: nothing is sent for an invalid URL.
      this.vm = {
        ...freshViewModel(),
        enteredUrl: url,
        error: { code: 'invalid_url', message: `not an absolute http(s) URL: ${url}` },
      };
      this.publish();
      return;
    }
    const ticket = ++this.sequence;
    this.vm = { ...freshViewModel(), enteredUrl: url, pending: true };
    this.publish();
    try {
      const report =
        mode === 'focused' ? await this.client.focusedScan(url) : await this.client.scanRp(url);
      if (ticket !== this.sequence) {
        return; // superseded by a newer scan
      }
      this.vm = { ...this.vm, report, pending: false, error: null };
    } catch (cause) {
      if (ticket !== this.sequence) {
        return;
      }
      this.vm = { ...this.vm, report: null, pending: false, error: this.toError(cause) };
    }
    this.publish();
  }

  /** Whether a scope may be toggled: marked optional and backed by a URL. */
  canToggle(idp: string, scope: string): boolean {
    if (!this.vm.report) {
      return false;
    }
    const result = findResult(this.vm.report, idp);
    if (!result || result.request === null) {
      return false;
    }
    const permission = result.permissions.find((p) => p.scope === scope);
    return permission?.optional === true;
  }

  selectedScopes(idp: string): string[] {
    return [...(this.vm.optoutSelection.get(idp) ?? new Set<string>())];
  }

  async toggleOptout(idp: string, scope: string): Promise<void> {
    if (!this.canToggle(idp, scope) || !this.vm.report) {
      return;
    }
    const result = findResult(this.vm.report, idp);
    if (!result || !result.request) {
      return;
    }
    const selection = new Set(this.vm.optoutSelection.get(idp) ?? []);
    if (selection.has(scope)) {
      selection.delete(scope);
    } else {
      selection.add(scope);
    }
    const optoutSelection = new Map(this.vm.optoutSelection);
    optoutSelection.set(idp, selection);

    const optoutPreview = new Map(this.vm.optoutPreview);
    if (selection.size === 0) {
      optoutPreview.delete(idp);
    } else {
      try {
        const ordered = result.permissions
          .map((p) => p.scope)
          .filter((token) => selection.has(token));
        optoutPreview.set(idp, await this.client.optOut(result.request.raw_url, ordered));
      } catch (cause) {
        this.vm = { ...this.vm, error: this.toError(cause) };
        this.publish();
        return;
      }
    }
    this.vm = { ...this.vm, optoutSelection, optoutPreview, error: null };
    this.publish();
  }
}
