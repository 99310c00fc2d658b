// Delegation admin: pick a grantee and a subset of your own effective
// permissions. The picker is bounded client-side by what the session holds;
// the server remains the authority and its 403 still renders if forced.

import { ApiError } from "../api.js";
import type { AppContext } from "../context.js";
import { clear, clearError, el, errorBox } from "../ui.js";

export async function renderAdmin(root: HTMLElement, ctx: AppContext): Promise<void> {
  clear(root);
  root.append(el("h2", {}, "Delegation"));

  const granteeBox = el("input", {
    id: "grantee-input",
    placeholder: "Grantee user id",
  });
  // offer usernames when the directory is readable; fall back to raw ids
  const datalist = el("datalist", { id: "grantee-options" });
  granteeBox.setAttribute("list", "grantee-options");
  if (ctx.permissions.has("user:list")) {
    try {
      const users = await ctx.api.listUsers();
      for (const user of users.items) {
        datalist.append(el("option", { value: user.id }, user.username));
      }
    } catch {
      // directory not readable after all; ids still work
    }
  }

  const picker = el("div", { id: "permission-picker" });
  for (const permission of ctx.permissions.all) {
    const token = `${permission.action}@${permission.scope_unit_id}`;
    const label = el(
      "label",
      { class: "permission-option" },
      el("input", { type: "checkbox", class: "permission-check", value: token }),
      `${permission.action} @ ${permission.scope_unit_name || permission.scope_unit_id}`,
    );
    picker.append(label);
  }

  const submit = el("button", { id: "grant-submit" }, "Delegate");
  const outcome = el("div", { id: "grant-outcome" });
  submit.addEventListener("click", async () => {
    clearError(root);
    const chosen = [...picker.querySelectorAll(".permission-check")]
      .filter((box) => (box as HTMLInputElement).checked)
      .map((box) => (box as HTMLInputElement).value);
    if (chosen.length === 0) {
      errorBox(root, "Pick at least one permission to delegate.");
      return;
    }
    try {
      const grant = await ctx.api.createGrant((granteeBox as HTMLInputElement).value, chosen);
      clear(outcome);
      outcome.append(
        el("p", { class: "grant-created" },
           `Grant ${grant.id} created (${grant.permissions.length} permission(s)).`),
      );
    } catch (error) {
      if (error instanceof ApiError) errorBox(root, error.detail);
      else throw error;
    }
  });

  root.append(granteeBox, datalist, picker, submit, outcome);
}
