import { describe, expect, it, vi } from 'vitest';

import { ApiRequestError, createClient } from '../src/api.js';

function fetchStub(status: number, body: unknown) {
  return vi.fn(async () => ({
    ok: status >= 200 && status < 300,
    status,
    text: async () => JSON.stringify(body),
  })) as unknown as typeof fetch;
}

describe('scan service client', () => {
  it('URL-encodes the scan target', async () => {
    const impl = fetchStub(200, { idp_results: [], misses: [], rp_origin: 'x', disclaimer: 'd' });
    await createClient(impl).scanRp('http://127.0.0.1:8099/site11?a=b');
    expect(impl).toHaveBeenCalledWith(
      '/api/scan?url=http%3A%2F%2F127.0.0.1%3A8099%2Fsite11%3Fa%3Db',
    );
  });

  it('posts the opt-out body and returns the rewritten URL untouched', async () => {
    const rewritten = 'https://idp.example/auth?scope=a%20b&state=s';
    const impl = fetchStub(200, { rewritten_url: rewritten });
    const result = await createClient(impl).optOut('https://idp.example/auth', ['c']);
    expect(result).toBe(rewritten);
    const [, init] = (impl as ReturnType<typeof vi.fn>).mock.calls[0];
    expect(init.method).toBe('POST');
    expect(JSON.parse(init.body)).toEqual({ url: 'https://idp.example/auth', scopes: ['c'] });
  });

  it('surfaces service errors with their code', async () => {
    const impl = fetchStub(400, { code: 'not_idp_url', message: 'nope' });
    await expect(createClient(impl).focusedScan('https://rp.example/x')).rejects.toMatchObject({
      code: 'not_idp_url',
      status: 400,
    });
  });

  it('synthesizes an error when the body is not JSON', async () => {
    const impl = vi.fn(async () => ({
      ok: false,
      status: 502,
      text: async () => 'bad gateway',
    })) as unknown as typeof fetch;
    const failure = await createClient(impl)
      .scanRp('http://x.example/')
      .catch((err: ApiRequestError) => err);
    expect(failure).toBeInstanceOf(ApiRequestError);
    expect((failure as ApiRequestError).code).toBe('internal');
  });
});
