// My Requests list plus the create-request wizard. Level-0 users (no search
// authority) get the basic form only: a single text box.

import { ApiError } from "../api.js";
import type { AppContext } from "../context.js";
import { canUseAdvancedForms } from "../permissions.js";
import { clear, clearError, dataTable, el, errorBox } from "../ui.js";

export async function renderRequests(root: HTMLElement, ctx: AppContext): Promise<void> {
  clear(root);
  root.append(el("h2", {}, "My Requests"));
  const listHost = el("div", { id: "request-list" });
  root.append(renderWizard(root, ctx, () => refresh()), listHost);

  const refresh = async () => {
    const mine = await ctx.api.listRequests();
    clear(listHost);
    if (mine.items.length === 0) {
      listHost.append(el("p", { class: "muted" }, "No requests yet."));
      return;
    }
    listHost.append(
      dataTable(
        [
          { key: "id", label: "Id" },
          { key: "kind", label: "Kind" },
          { key: "form", label: "Form" },
          { key: "text", label: "Text" },
          { key: "status", label: "Status" },
          { key: "created_at", label: "Created" },
        ],
        mine.items.map((r) => ({ ...r })),
        { sortable: true },
      ),
    );
  };
  await refresh();
}

function renderWizard(
  page: HTMLElement,
  ctx: AppContext,
  onCreated: () => void,
): HTMLElement {
  const advanced = canUseAdvancedForms(ctx.permissions);
  const host = el("section", { class: "request-wizard", id: "request-wizard" });
  host.append(el("h3", {}, "Create Request"));

  const formPicker = el("select", { id: "request-form-picker" });
  formPicker.append(el("option", { value: "basic" }, "Basic"));
  if (advanced) {
    formPicker.append(el("option", { value: "advanced" }, "Advanced"));
    formPicker.append(el("option", { value: "exception" }, "Exception"));
  }
  const kindPicker = el("select", { id: "request-kind-picker" });
  for (const kind of ["borrow", "reserve", "transfer"]) {
    kindPicker.append(el("option", { value: kind }, kind));
  }

  const textBox = el("textarea", {
    id: "request-text",
    placeholder: "Describe what you need (asset, location, ...)",
  });
  const linesHost = el("div", { id: "request-lines" });
  const addLine = el("button", { type: "button", id: "add-line" }, "Add another asset");
  addLine.addEventListener("click", () => {
    linesHost.append(lineRow());
  });
  const submit = el("button", { type: "submit", id: "request-submit" }, "Submit");
  const form = el("form", { id: "request-create-form" });

  const syncVisibility = () => {
    const mode = (formPicker as HTMLSelectElement).value;
    const wantsLines = mode === "advanced";
    linesHost.style.display = wantsLines ? "" : "none";
    addLine.style.display = wantsLines ? "" : "none";
    kindPicker.style.display = mode === "exception" ? "none" : "";
    if (wantsLines && linesHost.children.length === 0) {
      linesHost.append(lineRow());
    }
  };
  formPicker.addEventListener("change", syncVisibility);

  if (advanced) {
    form.append(
      el("label", {}, "Form"),
      formPicker,
      el("label", {}, "Kind"),
      kindPicker,
      textBox,
      linesHost,
      addLine,
      submit,
    );
    syncVisibility();
  } else {
    // the basic form is all a level-0 user gets: just the text box
    form.append(textBox, submit);
  }

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    clearError(page);
    const mode = advanced ? (formPicker as HTMLSelectElement).value : "basic";
    const kind = !advanced
      ? "borrow"
      : mode === "exception"
        ? "exception"
        : (kindPicker as HTMLSelectElement).value;
    const lines =
      mode === "advanced"
        ? [...linesHost.querySelectorAll(".line-row")].map((row) => ({
            asset_serial:
              (row.querySelector(".line-serial") as HTMLInputElement).value || null,
            location_id:
              (row.querySelector(".line-location") as HTMLInputElement).value || null,
            note: (row.querySelector(".line-note") as HTMLInputElement).value,
          }))
        : [];
    try {
      await ctx.api.createRequest({
        form: mode,
        kind,
        text: (textBox as HTMLTextAreaElement).value,
        lines,
      });
      (textBox as HTMLTextAreaElement).value = "";
      linesHost.replaceChildren();
      if (mode === "advanced") linesHost.append(lineRow());
      onCreated();
    } catch (error) {
      if (error instanceof ApiError) errorBox(page, error.detail);
      else throw error;
    }
  });
  host.append(form);
  return host;
}

function lineRow(): HTMLElement {
  return el(
    "div",
    { class: "line-row" },
    el("input", { class: "line-serial", placeholder: "Asset serial" }),
    el("input", { class: "line-location", placeholder: "Location id" }),
    el("input", { class: "line-note", placeholder: "Note" }),
  );
}
