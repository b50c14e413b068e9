/**
 * Aggregate and agreement dashboards. Every number shown is lifted
 * directly out of one API response; percentages come from the server's
 * `pct` field and are never derived from counts here.
 */

import type { AggregateTable, AgreementReport } from "./api.js";

const ASPECT_ORDER = [
  "GeneralDescription",
  "BrowserTabs",
  "FileIdentification",
  "SuspiciousElements",
];

function orderedAspects(table: AggregateTable): string[] {
  const known = ASPECT_ORDER.filter((a) => a in table);
  const rest = Object.keys(table).filter((a) => !ASPECT_ORDER.includes(a));
  return [...known, ...rest];
}

export function renderAggregate(
  container: HTMLElement,
  table: AggregateTable,
): void {
  container.innerHTML = "";
  const aspects = orderedAspects(table);
  if (aspects.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No consensus scores yet.";
    container.appendChild(empty);
    return;
  }

  const el = document.createElement("table");
  el.className = "aggregate";
  const head = el.createTHead().insertRow();
  for (const label of ["Aspect", "Score", "Occurrences", "Percentage"]) {
    const th = document.createElement("th");
    th.textContent = label;
    head.appendChild(th);
  }
  const body = el.createTBody();
  for (const aspect of aspects) {
    for (const row of table[aspect]) {
      const tr = body.insertRow();
      tr.dataset.aspect = aspect;
      tr.dataset.score = String(row.score);
      tr.insertCell().textContent = aspect;
      tr.insertCell().textContent = String(row.score);
      tr.insertCell().textContent = String(row.count);
      const pct = tr.insertCell();
      pct.className = "pct";
      pct.textContent = `${row.pct}%`;
    }
  }
  container.appendChild(el);
}

export function renderAgreement(
  container: HTMLElement,
  report: AgreementReport,
): void {
  container.innerHTML = "";
  if (report.per_aspect.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No double-coded items yet.";
    container.appendChild(empty);
    return;
  }
  const list = document.createElement("ul");
  list.className = "agreement";
  for (const row of report.per_aspect) {
    const li = document.createElement("li");
    li.dataset.aspect = row.aspect;
    const kappa = row.kappa_degenerate
      ? "degenerate"
      : row.cohen_kappa === null
        ? "n/a"
        : row.cohen_kappa.toFixed(3);
    li.textContent =
      `${row.aspect}: ${row.n_double_coded} double-coded, ` +
      `agreement ${row.percent_agreement}, kappa ${kappa}`;
    list.appendChild(li);
  }
  container.appendChild(list);

  const pending = document.createElement("p");
  pending.className = "unresolved-count";
  pending.textContent = `${report.unresolved_ids.length} unresolved disagreements`;
  container.appendChild(pending);
}
