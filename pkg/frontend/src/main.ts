/** App wiring: untested glue only; all logic lives in the other modules. */

import { ReviewApi, type Item } from "./api.js";
import { renderAggregate, renderAgreement } from "./dashboard.js";
import { renderItem } from "./itemView.js";
import { DisagreementQueue } from "./queue.js";
import { ScorePanel } from "./scorePanel.js";

async function boot(): Promise<void> {
  const coder = new URLSearchParams(location.search).get("coder") ?? "anonymous";
  const api = new ReviewApi("", coder);

  const itemEl = document.getElementById("item")!;
  const panelEl = document.getElementById("score-panel")!;
  const aggregateEl = document.getElementById("aggregate")!;
  const agreementEl = document.getElementById("agreement")!;
  const queueEl = document.getElementById("queue")!;

  const queue = new DisagreementQueue(api);

  const refreshDashboards = async (): Promise<void> => {
    renderAggregate(aggregateEl, await api.aggregate());
    renderAgreement(agreementEl, await api.agreement());
    await queue.refresh();
    queue.render(queueEl);
  };

  const page = await api.listItems({ page_size: 1 });
  const first = page.items[0];
  if (first) {
    renderItem(itemEl, api, first);
    const panel = new ScorePanel(api, panelEl, first, (_: Item) => {
      void refreshDashboards();
    });
    panel.attach(window);
  }
  await refreshDashboards();
}

void boot();
