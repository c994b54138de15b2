/**
 * ExplorationState: everything a view needs, round-trippable through the
 * URL query string so any exploration session is shareable. Decoding an
 * encoded state always reproduces it exactly.
 */

export interface ExplorationState {
  /** Selected month, or null before the month list has loaded. */
  month: string | null;
  algorithm: string;
  k: number;
  /** Focused cluster id within the selected clustering. */
  cluster: number | null;
  /** Focused subreddit (drives the neighbor timeline). */
  subreddit: string | null;
  /** Comparison month for snapshot compare; never equal to `month`. */
  compare: string | null;
}

export const ALGORITHMS = ['kmeanspp', 'ha_ward', 'ha_average', 'ha_complete'];

export const DEFAULT_STATE: ExplorationState = {
  month: null,
  algorithm: 'kmeanspp',
  k: 100,
  cluster: null,
  subreddit: null,
  compare: null,
};

/** Encode as a query string, omitting defaults so URLs stay short. */
export function encodeState(state: ExplorationState): string {
  const params = new URLSearchParams();
  if (state.month !== null) params.set('m', state.month);
  if (state.algorithm !== DEFAULT_STATE.algorithm) params.set('algo', state.algorithm);
  if (state.k !== DEFAULT_STATE.k) params.set('k', String(state.k));
  if (state.cluster !== null) params.set('c', String(state.cluster));
  if (state.subreddit !== null) params.set('s', state.subreddit);
  if (state.compare !== null && state.compare !== state.month) {
    params.set('vs', state.compare);
  }
  return params.toString();
}

function intOrNull(raw: string | null): number | null {
  if (raw === null) return null;
  const value = Number(raw);
  return Number.isInteger(value) && value >= 0 ? value : null;
}

/**
 * Decode a query string (or URLSearchParams). Malformed values fall back
 * to defaults; a comparison month equal to the selected month is dropped,
 * keeping the state invariant even for hand-edited URLs.
 */
export function decodeState(query: string | URLSearchParams): ExplorationState {
  const params =
    typeof query === 'string' ? new URLSearchParams(query) : query;
  const month = params.get('m');
  const algorithm = params.get('algo') ?? DEFAULT_STATE.algorithm;
  const k = intOrNull(params.get('k'));
  const compare = params.get('vs');
  return {
    month,
    algorithm: ALGORITHMS.includes(algorithm)
      ? algorithm
      : DEFAULT_STATE.algorithm,
    k: k !== null && k >= 1 ? k : DEFAULT_STATE.k,
    cluster: intOrNull(params.get('c')),
    subreddit: params.get('s'),
    compare: compare !== null && compare !== month ? compare : null,
  };
}

/** Apply a partial update, re-establishing the compare != month invariant. */
export function updateState(
  state: ExplorationState,
  patch: Partial<ExplorationState>,
): ExplorationState {
  const next = { ...state, ...patch };
  if (next.compare !== null && next.compare === next.month) next.compare = null;
  return next;
}
