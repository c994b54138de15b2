import { describe, expect, it } from 'vitest';

import { ApiClient, canonicalQuery } from '../src/api.js';

/** Fetcher that records calls and lets the test resolve them by hand. */
function manualFetcher() {
  const calls: string[] = [];
  const resolvers: ((value: unknown) => void)[] = [];
  const fetchJson = (url: string) => {
    calls.push(url);
    return new Promise<unknown>((resolve) => resolvers.push(resolve));
  };
  return { calls, resolvers, fetchJson };
}

describe('request deduplication', () => {
  it('collapses concurrent identical requests into one fetch', async () => {
    const { calls, resolvers, fetchJson } = manualFetcher();
    const client = new ApiClient('', fetchJson);

    const first = client.vi('kmeanspp', 2);
    const second = client.vi('kmeanspp', 2);
    expect(calls).toHaveLength(1);
    expect(client.pending).toBe(1);

    resolvers[0]!({ labels: [] });
    expect(await first).toEqual({ labels: [] });
    expect(await second).toEqual({ labels: [] });
    expect(client.pending).toBe(0);

    // settled: a new request fetches again
    void client.vi('kmeanspp', 2);
    expect(calls).toHaveLength(2);
  });

  it('keys on endpoint and params, not call order', async () => {
    const { calls, fetchJson } = manualFetcher();
    const client = new ApiClient('', fetchJson);
    void client.clusters('2021-04', 'kmeanspp', 2);
    void client.clusters('2021-04', 'kmeanspp', 3);
    void client.clusters('2021-05', 'kmeanspp', 2);
    void client.clusters('2021-04', 'kmeanspp', 2);
    expect(calls).toHaveLength(3);
  });

  it('clears the in-flight slot on failure so retry refetches', async () => {
    let attempts = 0;
    const client = new ApiClient('', () => {
      attempts += 1;
      return Promise.reject(new Error('connection refused'));
    });
    await expect(client.months()).rejects.toThrow('connection refused');
    await expect(client.months()).rejects.toThrow('connection refused');
    expect(attempts).toBe(2);
  });
});

describe('urls', () => {
  it('builds canonical sorted query strings', () => {
    expect(canonicalQuery({ k: 2, algo: 'kmeanspp' })).toBe('algo=kmeanspp&k=2');
    expect(canonicalQuery({ n: undefined })).toBe('');
  });

  it('escapes path segments', async () => {
    const { calls, fetchJson } = manualFetcher();
    const client = new ApiClient('', fetchJson);
    void client.neighbors('2021-04', 'ask science', 5);
    expect(calls[0]).toBe(
      '/api/months/2021-04/subreddits/ask%20science/neighbors?n=5',
    );
  });
});
