// Reports page: the three report kinds with filter controls, single-field
// sorting, and CSV download.

import { ApiError } from "../api.js";
import type { AppContext } from "../context.js";
import { clear, clearError, dataTable, el, errorBox } from "../ui.js";

const REPORTS: { kind: string; label: string; filters: string[] }[] = [
  {
    kind: "assets-by-location",
    label: "Assets by location",
    filters: ["building", "floor", "room", "owner_unit", "type", "state"],
  },
  {
    kind: "requests",
    label: "Requests",
    filters: ["status", "kind", "requester"],
  },
  {
    kind: "user-permissions",
    label: "User permissions",
    filters: ["username", "action"],
  },
];

export async function renderReports(root: HTMLElement, ctx: AppContext): Promise<void> {
  clear(root);
  root.append(el("h2", {}, "Reports"));

  const kindPicker = el("select", { id: "report-kind" });
  for (const report of REPORTS) {
    kindPicker.append(el("option", { value: report.kind }, report.label));
  }
  const filterHost = el("div", { id: "report-filters" });
  const sortBox = el("input", { id: "report-sort", placeholder: "sort column" });
  const run = el("button", { id: "report-run" }, "Run");
  const download = el("button", { id: "report-download" }, "Download CSV");
  const output = el("div", { id: "report-output" });
  root.append(kindPicker, filterHost, sortBox, run, download, output);

  const syncFilters = () => {
    const spec = REPORTS.find((r) => r.kind === (kindPicker as HTMLSelectElement).value)!;
    clear(filterHost);
    for (const field of spec.filters) {
      filterHost.append(
        el("input", { class: "report-filter", "data-field": field, placeholder: field }),
      );
    }
  };
  kindPicker.addEventListener("change", syncFilters);
  syncFilters();

  const collect = () => {
    const filters: Record<string, string> = {};
    filterHost.querySelectorAll(".report-filter").forEach((input) => {
      const box = input as HTMLInputElement;
      if (box.value) filters[box.dataset["field"]!] = box.value;
    });
    return filters;
  };

  run.addEventListener("click", async () => {
    clearError(root);
    try {
      const sort = (sortBox as HTMLInputElement).value || undefined;
      const table = await ctx.api.report(
        (kindPicker as HTMLSelectElement).value, collect(), sort);
      clear(output);
      output.append(
        dataTable(
          table.columns.map((c) => ({ key: c, label: c })),
          table.rows,
          { sortable: true },
        ),
      );
    } catch (error) {
      if (error instanceof ApiError) errorBox(root, error.detail);
      else throw error;
    }
  });

  download.addEventListener("click", async () => {
    clearError(root);
    try {
      const kind = (kindPicker as HTMLSelectElement).value;
      const csv = await ctx.api.reportCsv(kind, collect());
      const blob = new Blob([csv], { type: "text/csv" });
      const link = el("a", {
        href: URL.createObjectURL(blob),
        download: `${kind}.csv`,
      });
      document.body.append(link);
      link.click();
      link.remove();
    } catch (error) {
      if (error instanceof ApiError) errorBox(root, error.detail);
      else throw error;
    }
  });
}
