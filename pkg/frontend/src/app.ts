/**
 * Wiring: URL state -> API fetches -> view models -> innerHTML, with one
 * delegated click handler per container. Single-threaded and event-driven;
 * the ApiClient already collapses duplicate in-flight requests, and a
 * generation counter drops responses that arrive after the state moved on.
 */

import { ApiClient, ApiError } from './api.js';
import type { ClustersDoc, LayoutDoc, TimelineDoc, ViDoc } from './api.js';
import {
  decodeState,
  encodeState,
  updateState,
  type ExplorationState,
} from './state.js';
import {
  renderClusterBrowser,
  renderCompare,
  renderError,
  renderTimeline,
} from './render.js';
import { clusterBrowser, neighborTimeline, snapshotCompare } from './viewmodel.js';

const api = new ApiClient('');
let state: ExplorationState = decodeState(window.location.search.slice(1));
let generation = 0;

const el = (id: string) => document.getElementById(id)!;

function pushState(patch: Partial<ExplorationState>): void {
  state = updateState(state, patch);
  const query = encodeState(state);
  window.history.pushState(null, '', query ? `?${query}` : window.location.pathname);
  void refresh();
}

async function loadOrNull<T>(p: Promise<T>): Promise<T | null> {
  try {
    return await p;
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) return null;
    throw err;
  }
}

async function refresh(): Promise<void> {
  const gen = ++generation;
  try {
    const months = await api.months();
    if (gen !== generation) return;
    if (state.month === null && months.length > 0) {
      state = updateState(state, { month: months[months.length - 1] ?? null });
    }
    renderControls(months);

    if (state.month === null) {
      el('clusters').innerHTML = '<p>no months in the artifact tree</p>';
      return;
    }

    const [clusters, layout] = await Promise.all([
      api.clusters(state.month, state.algorithm, state.k),
      loadOrNull(api.layout(state.month)),
    ]);
    if (gen !== generation) return;
    el('clusters').innerHTML = renderClusterBrowser(
      clusterBrowser(clusters, state.cluster, layout),
    );

    await renderTimelinePane(gen);
    await renderComparePane(gen, clusters);
  } catch (err) {
    if (gen !== generation) return;
    const message =
      err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    el('clusters').innerHTML = renderError(message);
  }
}

async function renderTimelinePane(gen: number): Promise<void> {
  const pane = el('timeline');
  if (state.subreddit === null) {
    pane.innerHTML = '<p>click a subreddit to see its neighbor timeline</p>';
    return;
  }
  let doc: TimelineDoc | null;
  try {
    doc = await api.timeline(state.subreddit);
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      pane.innerHTML = `<p class="notfound">no such subreddit: ${state.subreddit}</p>`;
      return;
    }
    throw err;
  }
  if (gen !== generation) return;
  pane.innerHTML = renderTimeline(neighborTimeline(doc));
}

async function renderComparePane(
  gen: number,
  clusters: ClustersDoc,
): Promise<void> {
  const pane = el('compare');
  if (state.compare === null) {
    pane.innerHTML = renderCompare(
      snapshotCompare(state.month, null, null, null, null),
    );
    return;
  }
  const [other, vi]: [ClustersDoc | null, ViDoc | null] = await Promise.all([
    loadOrNull(api.clusters(state.compare, state.algorithm, state.k)),
    loadOrNull(api.vi(state.algorithm, state.k)),
  ]);
  if (gen !== generation) return;
  pane.innerHTML = renderCompare(
    snapshotCompare(state.month, state.compare, clusters, other, vi),
  );
}

function renderControls(months: string[]): void {
  const options = (selected: string | null, blank: string) =>
    `<option value="">${blank}</option>` +
    months
      .map(
        (m) =>
          `<option value="${m}"${m === selected ? ' selected' : ''}>${m}</option>`,
      )
      .join('');
  el('controls').innerHTML =
    `<select id="pick-month">${options(state.month, 'month...')}</select>` +
    `<select id="pick-compare">${options(state.compare, 'compare with...')}</select>` +
    `<span class="hint">algo=${state.algorithm} k=${state.k} (set via ?algo=&k=)</span>`;
  el('pick-month').onchange = (e) =>
    pushState({ month: (e.target as HTMLSelectElement).value || null, cluster: null });
  el('pick-compare').onchange = (e) =>
    pushState({ compare: (e.target as HTMLSelectElement).value || null });
}

function delegate(containerId: string): void {
  el(containerId).addEventListener('click', (event) => {
    const target = (event.target as HTMLElement).closest(
      '[data-cluster],[data-sub],[data-retry],[data-show-all]',
    ) as HTMLElement | null;
    if (!target) return;
    if (target.dataset.retry !== undefined) void refresh();
    else if (target.dataset.showAll !== undefined) {
      // reveal past the initial budget: re-render with everything
      void revealAllClusters();
    } else if (target.dataset.cluster !== undefined) {
      pushState({ cluster: Number(target.dataset.cluster) });
    } else if (target.dataset.sub !== undefined) {
      pushState({ subreddit: target.dataset.sub });
    }
  });
}

async function revealAllClusters(): Promise<void> {
  if (state.month === null) return;
  const clusters = await api.clusters(state.month, state.algorithm, state.k);
  const layout = await loadOrNull(api.layout(state.month));
  const vm = clusterBrowser(clusters, state.cluster, layout);
  el('clusters').innerHTML = renderClusterBrowser({
    ...vm,
    visible: vm.rows,
    hiddenCount: 0,
  });
}

window.addEventListener('popstate', () => {
  state = decodeState(window.location.search.slice(1));
  void refresh();
});

for (const id of ['clusters', 'timeline', 'compare']) delegate(id);
void refresh();
