// Small DOM helpers shared by the pages.

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

export function clear(root: HTMLElement): void {
  root.replaceChildren();
}

/** Inline error banner; every 4xx renders the server's detail here. */
export function errorBox(root: HTMLElement, message: string): void {
  root.querySelector(".error-box")?.remove();
  root.prepend(el("div", { class: "error-box", role: "alert" }, message));
}

export function clearError(root: HTMLElement): void {
  root.querySelector(".error-box")?.remove();
}

/** In-page confirmation dialog. Resolves true on confirm, false on cancel. */
export function confirmDialog(message: string): Promise<boolean> {
  return new Promise((resolve) => {
    const overlay = el(
      "div",
      { class: "confirm-overlay" },
      el(
        "div",
        { class: "confirm-dialog", role: "dialog" },
        el("p", {}, message),
        el("button", { class: "confirm-yes" }, "Confirm"),
        el("button", { class: "confirm-no" }, "Cancel"),
      ),
    );
    const finish = (answer: boolean) => {
      overlay.remove();
      resolve(answer);
    };
    overlay.querySelector(".confirm-yes")!.addEventListener("click", () => finish(true));
    overlay.querySelector(".confirm-no")!.addEventListener("click", () => finish(false));
    document.body.append(overlay);
  });
}

export interface Column {
  key: string;
  label: string;
}

/** Plain data table with click-to-sort column headers. */
export function dataTable(
  columns: Column[],
  rows: Record<string, unknown>[],
  options: { sortable?: boolean } = {},
): HTMLTableElement {
  const table = el("table", { class: "data-table" });
  const head = el("tr");
  let sortKey: string | null = null;
  let ascending = true;

  const renderBody = () => {
    table.querySelectorAll("tr:not(.head)").forEach((tr) => tr.remove());
    const ordered = [...rows];
    if (sortKey !== null) {
      const key = sortKey;
      ordered.sort((a, b) => {
        const left = String(a[key] ?? "");
        const right = String(b[key] ?? "");
        return ascending ? left.localeCompare(right) : right.localeCompare(left);
      });
    }
    for (const row of ordered) {
      const tr = el("tr");
      for (const column of columns) {
        tr.append(el("td", {}, String(row[column.key] ?? "")));
      }
      table.append(tr);
    }
  };

  head.className = "head";
  for (const column of columns) {
    const th = el("th", { "data-key": column.key }, column.label);
    if (options.sortable) {
      th.classList.add("sortable");
      th.addEventListener("click", () => {
        ascending = sortKey === column.key ? !ascending : true;
        sortKey = column.key;
        renderBody();
      });
    }
    head.append(th);
  }
  table.append(head);
  renderBody();
  return table;
}
