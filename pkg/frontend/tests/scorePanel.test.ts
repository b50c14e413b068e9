import { afterEach, describe, expect, it, vi } from "vitest";

import { ReviewApi, type Item } from "../src/api.js";
import { ScorePanel } from "../src/scorePanel.js";
import { FetchStub } from "./stub.js";

afterEach(() => vi.unstubAllGlobals());

function item(overrides: Partial<Item> = {}): Item {
  return {
    screenshot_id: "s1",
    image_url: "/api/items/s1/image",
    parsed: null,
    applicability: null,
    scores: {},
    consensus: {},
    status: "Unscored",
    ...overrides,
  };
}

function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

describe("keyboard scoring path", () => {
  it("digit keys set the pending score and Enter submits it", async () => {
    const stub = new FetchStub().on("POST", "/api/items/s1/scores", () =>
      ({ body: item({ status: "PartiallyScored" }) }));
    stub.install();
    const panel = new ScorePanel(
      new ReviewApi("", "coderA"),
      document.createElement("div"),
      item(),
    );

    panel.handleKey("2");
    expect(panel.pendingScore).toBe(2);
    panel.handleKey("Enter");
    await flush();

    expect(stub.calls).toHaveLength(1);
    expect(stub.calls[0].body).toEqual({
      aspect: "GeneralDescription",
      score: 2,
      note: "",
    });
    expect(panel.currentAspect).toBe("BrowserTabs");
    expect(panel.pendingScore).toBeNull();
  });

  it("key 9 maps to score 99", async () => {
    const stub = new FetchStub().on("POST", "/api/items/s1/scores", {
      ...item(),
    });
    stub.install();
    const panel = new ScorePanel(
      new ReviewApi(),
      document.createElement("div"),
      item(),
    );
    panel.handleKey("9");
    expect(panel.pendingScore).toBe(99);
    panel.handleKey("Enter");
    await flush();
    expect((stub.calls[0].body as { score: number }).score).toBe(99);
  });

  it("Enter without a pending score does nothing", async () => {
    const stub = new FetchStub();
    stub.install();
    const panel = new ScorePanel(
      new ReviewApi(),
      document.createElement("div"),
      item(),
    );
    panel.handleKey("Enter");
    await flush();
    expect(stub.calls).toHaveLength(0);
  });

  it("ignores unrelated keys", () => {
    const panel = new ScorePanel(
      new ReviewApi(),
      document.createElement("div"),
      item(),
    );
    panel.handleKey("x");
    panel.handleKey("5");
    expect(panel.pendingScore).toBeNull();
  });

  it("walks all four aspects in fixed order via keyboard only", async () => {
    const stub = new FetchStub().on("POST", "/api/items/s1/scores", {
      ...item(),
    });
    stub.install();
    const panel = new ScorePanel(
      new ReviewApi(),
      document.createElement("div"),
      item(),
    );
    for (const key of ["2", "1", "0", "9"]) {
      panel.handleKey(key);
      panel.handleKey("Enter");
      await flush();
    }
    const aspects = stub.calls.map(
      (c) => (c.body as { aspect: string }).aspect,
    );
    expect(aspects).toEqual([
      "GeneralDescription",
      "BrowserTabs",
      "FileIdentification",
      "SuspiciousElements",
    ]);
    const scores = stub.calls.map((c) => (c.body as { score: number }).score);
    expect(scores).toEqual([2, 1, 0, 99]);
  });

  it("responds to real keydown events when attached", async () => {
    const stub = new FetchStub().on("POST", "/api/items/s1/scores", {
      ...item(),
    });
    stub.install();
    const panel = new ScorePanel(
      new ReviewApi(),
      document.createElement("div"),
      item(),
    );
    panel.attach(window);
    window.dispatchEvent(new KeyboardEvent("keydown", { key: "1" }));
    window.dispatchEvent(new KeyboardEvent("keydown", { key: "Enter" }));
    await flush();
    expect(stub.calls).toHaveLength(1);
    expect((stub.calls[0].body as { score: number }).score).toBe(1);
  });
});
