import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, LatestWins } from "../src/api.js";

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("LatestWins", () => {
  it("suppresses out-of-order responses", async () => {
    const inflight = new LatestWins<string>();
    let releaseFirst: (value: string) => void = () => {};
    const first = inflight.run(
      () => new Promise<string>((resolve) => (releaseFirst = resolve)),
    );
    const second = inflight.run(() => Promise.resolve("second"));
    releaseFirst("first"); // arrives after the second request started
    expect(await second).toBe("second");
    expect(await first).toBeUndefined();
  });

  it("aborts the previous request's signal", async () => {
    const inflight = new LatestWins<number>();
    let firstSignal: AbortSignal | undefined;
    const first = inflight.run(
      (signal) =>
        new Promise<number>((_, reject) => {
          firstSignal = signal;
          signal.addEventListener("abort", () =>
            reject(new DOMException("aborted", "AbortError")),
          );
        }),
    );
    const second = inflight.run(() => Promise.resolve(2));
    expect(await second).toBe(2);
    expect(firstSignal?.aborted).toBe(true);
    expect(await first).toBeUndefined(); // abort swallowed, not thrown
  });

  it("still throws errors from the latest request", async () => {
    const inflight = new LatestWins<number>();
    await expect(
      inflight.run(() => Promise.reject(new Error("boom"))),
    ).rejects.toThrow("boom");
  });
});

describe("ApiClient", () => {
  it("joins field errors from a 400 body into the thrown message", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () =>
        new Response(
          JSON.stringify({ errors: [{ field: "cpi", message: "out of range" }] }),
          { status: 400 },
        ),
      ),
    );
    const client = new ApiClient("http://svc");
    await expect(
      client.project({
        dob: "1985-10-01",
        salary: 30000,
        cpi: 0.9,
        rules_old: "uss2021",
        rules_new: "uuk2021",
      }),
    ).rejects.toThrow("cpi: out of range");
  });

  it("unwraps the presets list", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () =>
        new Response(JSON.stringify({ presets: [{ id: "uss2021" }] }), {
          status: 200,
        }),
      ),
    );
    const presets = await new ApiClient().presets();
    expect(presets.map((p) => p.id)).toEqual(["uss2021"]);
  });
});
