/**
 * Disagreement queue: items where coders differ and no consensus exists.
 * The count comes from the server's paging total; resolving an item
 * re-fetches rather than decrementing locally.
 */

import type { Aspect, Item, ReviewApi, Score } from "./api.js";

export class DisagreementQueue {
  private items: Item[] = [];
  private total = 0;

  constructor(private api: ReviewApi) {}

  get count(): number {
    return this.total;
  }

  get current(): Item | null {
    return this.items[0] ?? null;
  }

  async refresh(): Promise<void> {
    const page = await this.api.listItems({
      status: "Disagreement",
      page_size: 100,
    });
    this.items = page.items;
    this.total = page.total;
  }

  async resolve(
    id: string,
    aspect: Aspect,
    score: Score,
    rationale = "",
  ): Promise<void> {
    await this.api.submitConsensus(id, aspect, score, rationale);
    await this.refresh();
  }

  render(container: HTMLElement): void {
    container.innerHTML = "";
    const badge = document.createElement("span");
    badge.className = "queue-count";
    badge.textContent = String(this.total);
    container.appendChild(badge);

    const list = document.createElement("ul");
    for (const item of this.items) {
      const li = document.createElement("li");
      li.dataset.id = item.screenshot_id;
      li.textContent = item.screenshot_id;
      list.appendChild(li);
    }
    container.appendChild(list);
  }
}
