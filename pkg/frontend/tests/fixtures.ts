/**
 * Mock API documents shaped exactly like the artifact server's responses
 * for the bundled two-month fixture (four subreddits, two clusters).
 * Values carry full float precision on purpose: the pass-through tests
 * prove the UI neither rounds nor recomputes them.
 */

import type {
  ClustersDoc,
  LayoutDoc,
  TimelineDoc,
  ViDoc,
} from '../src/api.js';

export const CLUSTERS_APRIL: ClustersDoc = {
  month: '2021-04',
  algorithm: 'kmeanspp',
  k: 2,
  seed: 0,
  assignment: { sub_alpha: 0, sub_beta: 1, sub_delta: 1, sub_gamma: 0 },
  sizes: [2, 2],
  top_members: {
    '0': ['sub_alpha', 'sub_gamma'],
    '1': ['sub_beta', 'sub_delta'],
  },
};

export const CLUSTERS_MAY: ClustersDoc = {
  month: '2021-05',
  algorithm: 'kmeanspp',
  k: 2,
  seed: 0,
  assignment: { sub_beta: 0, sub_delta: 1, sub_epsilon: 1, sub_gamma: 0 },
  sizes: [2, 2],
  top_members: {
    '0': ['sub_beta', 'sub_gamma'],
    '1': ['sub_delta', 'sub_epsilon'],
  },
};

export const LAYOUT_APRIL: LayoutDoc = {
  month: '2021-04',
  coordinates: {
    sub_alpha: [0.1882716049382716, -0.9192100131215347],
    sub_beta: [-0.7071067811865476, 0.3535533905932738],
    sub_delta: [-0.201948583420776, 0.44824065011875],
    sub_gamma: [0.6172839506172839, 0.1234567901234568],
  },
};

export const VI_KMEANSPP_K2: ViDoc = {
  algorithm: 'kmeanspp',
  k: 2,
  labels: ['2021-04', '2021-05'],
  matrix: [
    [0.0, 1.584962500721156],
    [1.584962500721156, 0.0],
  ],
  comparisons: [
    [1, 1],
    [1, 1],
  ],
  units: 'bits',
};

/** Twelve months with one gap (2021-08 absent): 11 adjacent badges. */
export const TIMELINE_12_MONTHS: TimelineDoc = (() => {
  const months = [
    '2021-01', '2021-02', '2021-03', '2021-04', '2021-05', '2021-06',
    '2021-07', '2021-08', '2021-09', '2021-10', '2021-11', '2021-12',
  ];
  const absent = '2021-08';
  const neighbors: TimelineDoc['neighbors'] = {};
  for (const [index, month] of months.entries()) {
    neighbors[month] =
      month === absent
        ? null
        : [
            { subreddit: 'sub_beta', similarity: 0.97182803421020508 - index / 64 },
            { subreddit: 'sub_gamma', similarity: 0.84123873710632324 - index / 64 },
          ];
  }
  const adjacent_jaccard: TimelineDoc['adjacent_jaccard'] = [];
  for (let i = 0; i + 1 < months.length; i++) {
    const a = months[i]!;
    const b = months[i + 1]!;
    adjacent_jaccard.push({
      months: [a, b],
      jaccard: a === absent || b === absent ? null : 1 / 3 + i / 100,
    });
  }
  return { subreddit: 'sub_alpha', n: 2, months, neighbors, adjacent_jaccard };
})();

/** A k=100 clusters document for the render-budget check. */
export function clustersK100(): ClustersDoc {
  const assignment: Record<string, number> = {};
  const sizes: number[] = [];
  const top_members: Record<string, string[]> = {};
  let serial = 0;
  for (let id = 0; id < 100; id++) {
    const size = (id % 7) + 1;
    sizes.push(size);
    const members: string[] = [];
    for (let i = 0; i < size; i++) {
      const name = `s${String(serial++).padStart(4, '0')}`;
      assignment[name] = id;
      members.push(name);
    }
    top_members[String(id)] = members.slice(0, 5);
  }
  return {
    month: '2021-04',
    algorithm: 'kmeanspp',
    k: 100,
    seed: 0,
    assignment,
    sizes,
    top_members,
  };
}
