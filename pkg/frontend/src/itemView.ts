/**
 * Side-by-side item view: screenshot on the left, parsed description on
 * the right with suspicious elements highlighted, since the coder's task
 * is comparing the description to the pixels.
 */

import type { Item, ReviewApi } from "./api.js";

function section(title: string, lines: string[]): HTMLElement {
  const wrap = document.createElement("section");
  const h = document.createElement("h4");
  h.textContent = title;
  wrap.appendChild(h);
  if (lines.length === 0) {
    const none = document.createElement("p");
    none.className = "none";
    none.textContent = "none";
    wrap.appendChild(none);
  } else {
    const ul = document.createElement("ul");
    for (const line of lines) {
      const li = document.createElement("li");
      li.textContent = line;
      ul.appendChild(li);
    }
    wrap.appendChild(ul);
  }
  return wrap;
}

export function renderItem(
  container: HTMLElement,
  api: ReviewApi,
  item: Item,
): void {
  container.innerHTML = "";
  const layout = document.createElement("div");
  layout.className = "item-view";

  const img = document.createElement("img");
  img.className = "screenshot";
  img.src = api.imageUrl(item.screenshot_id);
  img.alt = `screenshot ${item.screenshot_id}`;
  layout.appendChild(img);

  const details = document.createElement("div");
  details.className = "parsed";
  const p = item.parsed;
  if (p === null) {
    const missing = document.createElement("p");
    missing.textContent = "No parsed description.";
    details.appendChild(missing);
  } else {
    const main = document.createElement("p");
    main.className = "main-content";
    main.textContent = p.main_content;
    details.appendChild(main);
    details.appendChild(
      section("Files", [
        ...p.installers.map((n) => `installer: ${n}`),
        ...p.explorer_files,
        ...p.archive_members.map((n) => `archive: ${n}`),
      ]),
    );
    details.appendChild(section("URLs", p.url_entries));
    details.appendChild(
      section(
        "Tabs",
        p.tabs.map((t) => t.text ?? t.raw),
      ),
    );
    const susp = section(
      "Suspicious",
      p.suspicious.map((s) => s.raw),
    );
    susp.classList.add("suspicious");
    details.appendChild(susp);
    const meta = document.createElement("p");
    meta.className = "meta";
    meta.textContent = `${p.language || "unknown language"} | ${p.date_raw || "no date"}`;
    details.appendChild(meta);
  }
  layout.appendChild(details);
  container.appendChild(layout);
}
