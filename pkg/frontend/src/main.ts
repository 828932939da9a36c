/** Bootstrap: wire the form and report container to the dashboard state. */

import { createClient } from './api.js';
import { renderError, renderFocusedReport, renderPending, renderScanReport } from './render.js';
import { Dashboard, type Mode, type ViewModel } from './state.js';
import { isFocusedReport } from './types.js';

function renderApp(vm: ViewModel): string {
  if (vm.pending) {
    return renderPending(vm.enteredUrl);
  }
  if (vm.error) {
    return renderError(vm.error);
  }
  if (!vm.report) {
    return '<p class="empty">Enter a login-page URL to compare its SSO options.</p>';
  }
  return isFocusedReport(vm.report)
    ? renderFocusedReport(vm.report)
    : renderScanReport(vm.report);
}

function syncView(container: HTMLElement, vm: ViewModel): void {
  container.innerHTML = renderApp(vm);
  for (const [idp, scopes] of vm.optoutSelection) {
    for (const scope of scopes) {
      const selector = `.optout-toggle[data-idp="${CSS.escape(idp)}"][data-scope="${CSS.escape(scope)}"]`;
      const toggle = container.querySelector<HTMLInputElement>(selector);
      if (toggle) {
        toggle.checked = true;
      }
    }
  }
  for (const [idp, url] of vm.optoutPreview) {
    const box = container.querySelector<HTMLElement>(
      `.optout-preview[data-idp="${CSS.escape(idp)}"]`,
    );
    if (box) {
      box.hidden = false;
      box.textContent = url; // exactly as the service returned it
    }
  }
}

export function mount(root: Document = document): void {
  const form = root.querySelector<HTMLFormElement>('#scan-form');
  const input = root.querySelector<HTMLInputElement>('#url-input');
  const container = root.querySelector<HTMLElement>('#report');
  if (!form || !input || !container) {
    throw new Error('dashboard markup missing');
  }

  const dashboard = new Dashboard(createClient(), (vm) => syncView(container, vm));

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const mode = (
      root.querySelector<HTMLInputElement>('input[name="mode"]:checked')?.value ?? 'comparative'
    ) as Mode;
    void dashboard.scan(input.value.trim(), mode);
  });

  container.addEventListener('change', (event) => {
    const target = event.target as HTMLElement | null;
    if (target instanceof HTMLInputElement && target.classList.contains('optout-toggle')) {
      const { idp, scope } = target.dataset;
      if (idp && scope) {
        void dashboard.toggleOptout(idp, scope);
      }
    }
  });
}

if (typeof document !== 'undefined' && document.readyState !== 'loading') {
  mount();
} else if (typeof document !== 'undefined') {
  document.addEventListener('DOMContentLoaded', () => mount());
}
