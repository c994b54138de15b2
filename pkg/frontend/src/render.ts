/**
 * HTML string builders for the three views. Purely presentational: numbers
 * are interpolated with String() so what the screen shows is exactly what
 * the API returned (no rounding, no reformatting).
 */

import type { ClusterBrowserVM, CompareVM, TimelineVM } from './viewmodel.js';

export function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function renderError(message: string): string {
  return (
    `<div class="error"><p>${esc(message)}</p>` +
    `<button data-retry>retry</button></div>`
  );
}

export function renderClusterBrowser(vm: ClusterBrowserVM): string {
  const items = vm.visible
    .map(
      (row) =>
        `<li data-cluster="${row.id}"><span class="size">${String(row.size)}</span>` +
        ` cluster ${row.id}: ${row.topMembers.map(esc).join(', ')}</li>`,
    )
    .join('');
  const more =
    vm.hiddenCount > 0
      ? `<li class="more" data-show-all>&hellip; ${vm.hiddenCount} more clusters</li>`
      : '';
  const focused = vm.focused
    ? `<div class="members"><h3>cluster ${vm.focused.id}</h3><ul>` +
      vm.focused.members
        .map((m) => {
          const at = m.position
            ? ` <span class="pos">(${String(m.position[0])}, ${String(m.position[1])})</span>`
            : '';
          return `<li data-sub="${esc(m.name)}">${esc(m.name)}${at}</li>`;
        })
        .join('') +
      '</ul></div>'
    : '';
  return (
    `<h2>${esc(vm.month)} &middot; ${esc(vm.algorithm)} k=${String(vm.k)}</h2>` +
    `<ul class="clusters">${items}${more}</ul>${focused}`
  );
}

export function renderTimeline(vm: TimelineVM): string {
  const header = vm.columns
    .map(
      (col) =>
        `<th class="${col.present ? '' : 'absent'}">${esc(col.month)}</th>`,
    )
    .join('');
  const cells = vm.columns
    .map((col) => {
      if (!col.present) return '<td class="absent">absent</td>';
      const list = col.neighbors
        .map(
          (n) =>
            `<li data-sub="${esc(n.subreddit)}">${esc(n.subreddit)} ` +
            `<span class="sim">${String(n.similarity)}</span></li>`,
        )
        .join('');
      return `<td><ul>${list}</ul></td>`;
    })
    .join('');
  const badges = vm.badges
    .map(
      (b) =>
        `<span class="badge" title="${esc(b.from)} vs ${esc(b.to)}">` +
        `${b.jaccard === null ? '&ndash;' : String(b.jaccard)}</span>`,
    )
    .join('');
  return (
    `<h2>${esc(vm.subreddit)} &middot; top ${String(vm.n)} neighbors</h2>` +
    `<table><tr>${header}</tr><tr>${cells}</tr></table>` +
    `<div class="badges">${badges}</div>`
  );
}

export function renderCompare(vm: CompareVM): string {
  if (!vm.enabled) {
    return `<p class="disabled">compare unavailable: ${esc(vm.reason ?? '')}</p>`;
  }
  const side = (
    label: { month: string; rows: { id: number; size: number }[] },
    highlight: Set<string>,
  ) =>
    `<div class="side"><h3>${esc(label.month)}</h3><ul>` +
    label.rows
      .map((r) => `<li>cluster ${r.id}: ${String(r.size)} subs</li>`)
      .join('') +
    '</ul><p class="only">only here: ' +
    (highlight.size ? [...highlight].map(esc).join(', ') : 'none') +
    '</p></div>';
  const vi =
    vm.viBits === null
      ? '<p class="vi">VI unavailable for this pair</p>'
      : `<p class="vi">VI = <strong>${String(vm.viBits)}</strong> bits</p>`;
  return (
    side(vm.left!, new Set(vm.onlyLeft)) +
    side(vm.right!, new Set(vm.onlyRight)) +
    vi
  );
}
