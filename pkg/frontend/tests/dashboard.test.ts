import { afterEach, describe, expect, it, vi } from "vitest";

import { ReviewApi, type AggregateTable } from "../src/api.js";
import { renderAggregate, renderAgreement } from "../src/dashboard.js";
import { FetchStub } from "./stub.js";

afterEach(() => vi.unstubAllGlobals());

// published-table fixture as served by GET /api/aggregate
const TABLE: AggregateTable = {
  GeneralDescription: [
    { score: 2, count: 102, pct: 96.2 },
    { score: 1, count: 4, pct: 3.8 },
  ],
  BrowserTabs: [
    { score: 2, count: 15, pct: 14.2 },
    { score: 1, count: 16, pct: 15.1 },
    { score: 0, count: 18, pct: 17.0 },
    { score: 99, count: 55, pct: 51.9 },
  ],
};

describe("aggregate dashboard", () => {
  it("shows 96.2% for GeneralDescription score 2 from the API alone", async () => {
    const stub = new FetchStub().on("GET", "/api/aggregate", TABLE);
    stub.install();
    const api = new ReviewApi();
    const container = document.createElement("div");
    renderAggregate(container, await api.aggregate());

    const row = container.querySelector(
      'tr[data-aspect="GeneralDescription"][data-score="2"]',
    )!;
    expect(row.querySelector(".pct")!.textContent).toBe("96.2%");
    expect(stub.calls).toHaveLength(1);
  });

  it("displays the server pct verbatim, never recomputing from counts", () => {
    // server pct deliberately inconsistent with count: the view must echo it
    const container = document.createElement("div");
    renderAggregate(container, {
      GeneralDescription: [{ score: 2, count: 50, pct: 96.2 }],
    });
    const pct = container.querySelector(".pct")!;
    expect(pct.textContent).toBe("96.2%");
  });

  it("renders an empty state for an empty aggregate", () => {
    const container = document.createElement("div");
    renderAggregate(container, {});
    expect(container.querySelector(".empty-state")).not.toBeNull();
    expect(container.querySelector("table")).toBeNull();
  });

  it("keeps the fixed aspect order", () => {
    const container = document.createElement("div");
    renderAggregate(container, TABLE);
    const aspects = [...container.querySelectorAll("tbody tr")].map(
      (tr) => (tr as HTMLElement).dataset.aspect,
    );
    expect(aspects.slice(0, 2)).toEqual([
      "GeneralDescription",
      "GeneralDescription",
    ]);
    expect(aspects).toContain("BrowserTabs");
    expect(aspects.indexOf("BrowserTabs")).toBeGreaterThan(
      aspects.lastIndexOf("GeneralDescription"),
    );
  });
});

describe("agreement dashboard", () => {
  it("lists per-aspect agreement and unresolved count", () => {
    const container = document.createElement("div");
    renderAgreement(container, {
      per_aspect: [
        {
          aspect: "BrowserTabs",
          n_double_coded: 12,
          percent_agreement: 0.75,
          cohen_kappa: 0.5555555555,
          kappa_degenerate: false,
        },
      ],
      unresolved_ids: [
        { screenshot_id: "s1", aspect: "BrowserTabs", scores: [1, 2] },
      ],
    });
    const li = container.querySelector('li[data-aspect="BrowserTabs"]')!;
    expect(li.textContent).toContain("12 double-coded");
    expect(li.textContent).toContain("0.556");
    expect(container.querySelector(".unresolved-count")!.textContent).toContain(
      "1 unresolved",
    );
  });

  it("marks degenerate kappa instead of showing a number", () => {
    const container = document.createElement("div");
    renderAgreement(container, {
      per_aspect: [
        {
          aspect: "GeneralDescription",
          n_double_coded: 5,
          percent_agreement: 1.0,
          cohen_kappa: null,
          kappa_degenerate: true,
        },
      ],
      unresolved_ids: [],
    });
    expect(container.textContent).toContain("kappa degenerate");
  });
});
