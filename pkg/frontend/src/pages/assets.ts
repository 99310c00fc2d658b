// Asset browser: simple text search and advanced filters, sortable columns.

import { ApiError } from "../api.js";
import type { AppContext } from "../context.js";
import { clear, clearError, dataTable, el, errorBox } from "../ui.js";

const FILTER_FIELDS = ["serial", "type", "state", "owner_unit", "building", "holder"];

export async function renderAssets(root: HTMLElement, ctx: AppContext): Promise<void> {
  clear(root);
  root.append(el("h2", {}, "Assets"));

  const simpleBox = el("input", { id: "search-simple", placeholder: "Search inventory" });
  const simpleGo = el("button", { id: "search-simple-go" }, "Search");
  const controls = el("div", { class: "search-controls" }, simpleBox, simpleGo);

  const advancedHost = el("div", { class: "advanced-filters" });
  if (ctx.permissions.has("search:advanced")) {
    for (const field of FILTER_FIELDS) {
      advancedHost.append(
        el("input", { class: "filter-input", "data-field": field, placeholder: field }),
      );
    }
    advancedHost.append(el("button", { id: "search-advanced-go" }, "Filter"));
  }

  const results = el("div", { id: "asset-results" });
  root.append(controls, advancedHost, results);

  const show = async (params: Record<string, string>) => {
    clearError(root);
    try {
      const page = await ctx.api.search(params);
      clear(results);
      results.append(
        el("p", { class: "muted" }, `${page.total} asset(s)`),
        dataTable(
          [
            { key: "serial_number", label: "Serial" },
            { key: "type", label: "Type" },
            { key: "state", label: "State" },
            { key: "building", label: "Building" },
            { key: "room", label: "Room" },
          ],
          page.items.map((r) => ({ ...r })),
          { sortable: true },
        ),
      );
    } catch (error) {
      if (error instanceof ApiError) errorBox(root, error.detail);
      else throw error;
    }
  };

  simpleGo.addEventListener("click", () => {
    void show({ q: (simpleBox as HTMLInputElement).value });
  });
  advancedHost.querySelector("#search-advanced-go")?.addEventListener("click", () => {
    const params: Record<string, string> = { mode: "advanced" };
    advancedHost.querySelectorAll(".filter-input").forEach((input) => {
      const box = input as HTMLInputElement;
      if (box.value) params[box.dataset["field"]!] = box.value;
    });
    void show(params);
  });
}
