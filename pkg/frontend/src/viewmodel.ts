/**
 * Pure view-model builders: API documents in, render-ready structures out.
 *
 * Nothing here computes a metric. Every number that reaches the screen is
 * copied verbatim from an API response field; the only local work is
 * sorting, slicing, and set membership for highlights.
 */

import type { ClustersDoc, LayoutDoc, TimelineDoc, ViDoc } from './api.js';

/** Cap on list items in the initial cluster-browser render. */
export const INITIAL_RENDER_BUDGET = 50;

export interface ClusterRow {
  id: number;
  size: number;
  topMembers: string[];
}

export interface MemberPoint {
  name: string;
  /** Layout coordinates, pass-through; null when the layout lacks the sub. */
  position: [number, number] | null;
}

export interface ClusterBrowserVM {
  month: string;
  algorithm: string;
  k: number;
  /** All clusters, size descending (id ascending on ties). */
  rows: ClusterRow[];
  /** The initial render slice; never more than INITIAL_RENDER_BUDGET. */
  visible: ClusterRow[];
  hiddenCount: number;
  focused: { id: number; members: MemberPoint[] } | null;
}

export function clusterBrowser(
  doc: ClustersDoc,
  focusedCluster: number | null,
  layout: LayoutDoc | null,
): ClusterBrowserVM {
  const rows: ClusterRow[] = doc.sizes.map((size, id) => ({
    id,
    size,
    topMembers: doc.top_members[String(id)] ?? [],
  }));
  rows.sort((a, b) => b.size - a.size || a.id - b.id);

  let focused: ClusterBrowserVM['focused'] = null;
  if (focusedCluster !== null && focusedCluster < doc.sizes.length) {
    const members = Object.keys(doc.assignment)
      .filter((name) => doc.assignment[name] === focusedCluster)
      .sort()
      .map((name) => ({
        name,
        position: layout?.coordinates[name] ?? null,
      }));
    focused = { id: focusedCluster, members };
  }

  return {
    month: doc.month,
    algorithm: doc.algorithm,
    k: doc.k,
    rows,
    visible: rows.slice(0, INITIAL_RENDER_BUDGET),
    hiddenCount: Math.max(0, rows.length - INITIAL_RENDER_BUDGET),
    focused,
  };
}

export interface TimelineColumn {
  month: string;
  /** False when the subreddit is absent that month; render greyed, never fabricate. */
  present: boolean;
  neighbors: { subreddit: string; similarity: number }[];
}

export interface JaccardBadge {
  from: string;
  to: string;
  /** Null when either side of the pair is absent. */
  jaccard: number | null;
}

export interface TimelineVM {
  subreddit: string;
  n: number;
  columns: TimelineColumn[];
  /** One badge between each adjacent column pair: columns.length - 1. */
  badges: JaccardBadge[];
}

export function neighborTimeline(doc: TimelineDoc): TimelineVM {
  const columns: TimelineColumn[] = doc.months.map((month) => {
    const entry = doc.neighbors[month] ?? null;
    return { month, present: entry !== null, neighbors: entry ?? [] };
  });
  const badges: JaccardBadge[] = doc.adjacent_jaccard.map((pair) => ({
    from: pair.months[0],
    to: pair.months[1],
    jaccard: pair.jaccard,
  }));
  return { subreddit: doc.subreddit, n: doc.n, columns, badges };
}

export interface CompareVM {
  enabled: boolean;
  /** Why compare is disabled (same month twice, or missing selection). */
  reason: string | null;
  left: { month: string; rows: ClusterRow[] } | null;
  right: { month: string; rows: ClusterRow[] } | null;
  /** Subs present only in the left month (highlighted on the right side). */
  onlyLeft: string[];
  /** Subs present only in the right month (highlighted on the left side). */
  onlyRight: string[];
  /** The served VI cell for (left, right); null when the matrix lacks a month. */
  viBits: number | null;
}

/** Read one cell out of the served VI matrix; no arithmetic. */
export function viCell(doc: ViDoc, monthA: string, monthB: string): number | null {
  const i = doc.labels.indexOf(monthA);
  const j = doc.labels.indexOf(monthB);
  if (i < 0 || j < 0) return null;
  return doc.matrix[i]?.[j] ?? null;
}

const sizeRows = (doc: ClustersDoc): ClusterRow[] =>
  clusterBrowser(doc, null, null).rows;

export function snapshotCompare(
  monthA: string | null,
  monthB: string | null,
  docA: ClustersDoc | null,
  docB: ClustersDoc | null,
  vi: ViDoc | null,
): CompareVM {
  const empty = {
    left: null,
    right: null,
    onlyLeft: [],
    onlyRight: [],
    viBits: null,
  };
  if (monthA === null || monthB === null) {
    return { enabled: false, reason: 'pick a comparison month', ...empty };
  }
  if (monthA === monthB) {
    return {
      enabled: false,
      reason: 'comparison month must differ from the selected month',
      ...empty,
    };
  }
  if (docA === null || docB === null) {
    return { enabled: false, reason: 'loading', ...empty };
  }
  const inA = new Set(Object.keys(docA.assignment));
  const inB = new Set(Object.keys(docB.assignment));
  return {
    enabled: true,
    reason: null,
    left: { month: monthA, rows: sizeRows(docA) },
    right: { month: monthB, rows: sizeRows(docB) },
    onlyLeft: [...inA].filter((s) => !inB.has(s)).sort(),
    onlyRight: [...inB].filter((s) => !inA.has(s)).sort(),
    viBits: vi ? viCell(vi, monthA, monthB) : null,
  };
}
