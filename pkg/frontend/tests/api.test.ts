import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, emptyFilter, filterQuery } from "../src/api.js";
import { FakeApi, matrixPayload } from "./fixtures.js";

describe("filterQuery", () => {
  it("serializes an empty filter to just the metric", () => {
    expect(filterQuery(emptyFilter())).toBe("metric=bytes");
  });

  it("repeats keys for set membership and sorts values", () => {
    const f = { ...emptyFilter(), transports: ["sysv", "rc_mlx5"], metric: "count" as const };
    expect(filterQuery(f)).toBe("transports=rc_mlx5&transports=sysv&metric=count");
  });

  it("includes time bounds and bin width when present", () => {
    const f = { ...emptyFilter(), t_min: 5, t_max: 10 };
    expect(filterQuery(f, 250)).toBe("t_min=5&t_max=10&metric=bytes&bin_ns=250");
  });

  it("is total: every filter state maps to a query string", () => {
    const f = {
      transports: ["cuda_ipc"],
      uct_fns: ["get_zcopy"],
      mpi_fns: ["MPI_Isend"],
      nodes: ["n0"],
      procs: ["n0.p0"],
      t_min: 0,
      t_max: 1,
      metric: "count" as const,
    };
    expect(filterQuery(f)).toBe(
      "transports=cuda_ipc&uct_fns=get_zcopy&mpi_fns=MPI_Isend&nodes=n0&procs=n0.p0"
      + "&t_min=0&t_max=1&metric=count",
    );
  });
});

describe("ApiClient", () => {
  it("fetches a view and unwraps the envelope", async () => {
    const fake = new FakeApi();
    const api = new ApiClient("http://x", fake.fetch);
    const env = await api.view("matrix", emptyFilter());
    expect(env.payload).toEqual(matrixPayload);
    expect(fake.requests).toEqual(["http://x/matrix?metric=bytes"]);
  });

  it("raises ApiError for non-2xx responses", async () => {
    const fake = new FakeApi();
    const api = new ApiClient("http://x", async (url) => {
      await fake.fetch(url);
      return { ok: false, status: 400, json: async () => ({ error: "bad" }) };
    });
    await expect(api.view("matrix", emptyFilter())).rejects.toThrow(ApiError);
  });

  it("passes bin_ns only to the timeline view", async () => {
    const fake = new FakeApi();
    const api = new ApiClient("http://x", fake.fetch);
    await api.view("timeline", emptyFilter(), 500);
    await api.view("matrix", emptyFilter(), 500 as never);
    expect(fake.queriesFor("/timeline")).toEqual(["metric=bytes&bin_ns=500"]);
    expect(fake.queriesFor("/matrix")).toEqual(["metric=bytes"]);
  });
});
