/**
 * Keyboard-first scoring panel for one screenshot.
 *
 * Keys: 0 / 1 / 2 select that score, 9 selects 99 (not applicable),
 * Enter submits the pending score for the current aspect and advances to
 * the next aspect. The aspect order is fixed so coders build muscle
 * memory.
 */

import { ASPECTS, type Aspect, type Item, type ReviewApi, type Score } from "./api.js";

const KEY_TO_SCORE: Record<string, Score> = { "0": 0, "1": 1, "2": 2, "9": 99 };

export class ScorePanel {
  private aspectIndex = 0;
  private pending: Score | null = null;

  constructor(
    private api: ReviewApi,
    private container: HTMLElement,
    private item: Item,
    private onScored: (item: Item) => void = () => {},
  ) {
    this.render();
  }

  get currentAspect(): Aspect {
    return ASPECTS[this.aspectIndex];
  }

  get pendingScore(): Score | null {
    return this.pending;
  }

  handleKey(key: string): void {
    if (key in KEY_TO_SCORE) {
      this.pending = KEY_TO_SCORE[key];
      this.render();
      return;
    }
    if (key === "Enter" && this.pending !== null) {
      void this.submit();
    }
  }

  attach(target: EventTarget = window): void {
    target.addEventListener("keydown", (ev) =>
      this.handleKey((ev as KeyboardEvent).key),
    );
  }

  private async submit(): Promise<void> {
    if (this.pending === null) return;
    const updated = await this.api.submitScore(
      this.item.screenshot_id,
      this.currentAspect,
      this.pending,
    );
    this.item = updated;
    this.pending = null;
    if (this.aspectIndex < ASPECTS.length - 1) this.aspectIndex += 1;
    this.render();
    this.onScored(updated);
  }

  private render(): void {
    this.container.innerHTML = "";
    const header = document.createElement("h3");
    header.textContent = `Scoring ${this.item.screenshot_id}`;
    this.container.appendChild(header);

    const list = document.createElement("ol");
    list.className = "aspects";
    ASPECTS.forEach((aspect, i) => {
      const li = document.createElement("li");
      li.dataset.aspect = aspect;
      if (i === this.aspectIndex) li.classList.add("current");
      const done = this.item.consensus[aspect];
      li.textContent =
        aspect +
        (done !== undefined ? ` (consensus ${done})` : "") +
        (i === this.aspectIndex && this.pending !== null
          ? ` -> ${this.pending}`
          : "");
      list.appendChild(li);
    });
    this.container.appendChild(list);

    const hint = document.createElement("p");
    hint.className = "hint";
    hint.textContent = "0/1/2 score, 9 = not applicable, Enter submits";
    this.container.appendChild(hint);
  }
}
