// Approval queue: exactly what GET /api/requests/pending returns, with
// approve/reject controls behind confirmation dialogs. A confirmed 2xx
// removes the row in place; no reload.

import { ApiError } from "../api.js";
import type { AppContext } from "../context.js";
import type { RequestDoc } from "../types.js";
import { clear, clearError, confirmDialog, el, errorBox } from "../ui.js";

export async function renderApprovals(root: HTMLElement, ctx: AppContext): Promise<void> {
  clear(root);
  if (ctx.permissions.has("request:approve")) {
    root.append(el("h2", {}, "Approvals"));
    const listHost = el("div", { id: "approval-queue" });
    root.append(listHost);
    const pending = await ctx.api.pendingApprovals();
    if (pending.items.length === 0) {
      listHost.append(el("p", { class: "muted", id: "queue-empty" }, "Nothing waiting."));
    } else {
      for (const request of pending.items) {
        listHost.append(requestCard(root, ctx, listHost, request));
      }
    }
  }
  if (ctx.permissions.has("asset:edit")) {
    await renderExecutionList(root, ctx);
  }
}

/** Approved requests whose hand-over still needs confirming. */
async function renderExecutionList(root: HTMLElement, ctx: AppContext): Promise<void> {
  root.append(el("h2", {}, "Awaiting execution"));
  const host = el("div", { id: "execution-queue" });
  root.append(host);
  const waiting = await ctx.api.listRequests("awaiting_execution");
  if (waiting.items.length === 0) {
    host.append(el("p", { class: "muted", id: "execution-empty" }, "Nothing to hand over."));
    return;
  }
  for (const request of waiting.items) {
    const card = el(
      "div",
      { class: "execution-card", "data-request": request.id },
      el("h4", {}, `${request.kind} request ${request.id}`),
      el("p", {}, request.text || "(no text)"),
      el("button", { class: "execute-button" }, "Mark executed"),
    );
    card.querySelector(".execute-button")!.addEventListener("click", async () => {
      clearError(root);
      if (!(await confirmDialog(`Confirm the hand-over for ${request.id}?`))) return;
      try {
        await ctx.api.execute(request.id);
        card.remove();
        if (!host.querySelector(".execution-card")) {
          host.append(el("p", { class: "muted", id: "execution-empty" },
                         "Nothing to hand over."));
        }
      } catch (error) {
        if (error instanceof ApiError) errorBox(root, error.detail);
        else throw error;
      }
    });
    host.append(card);
  }
}

function requestCard(
  page: HTMLElement,
  ctx: AppContext,
  listHost: HTMLElement,
  request: RequestDoc,
): HTMLElement {
  const lines = request.lines
    .map((line) => [line.asset_serial, line.note].filter(Boolean).join(" — "))
    .filter(Boolean)
    .join("; ");
  const card = el(
    "div",
    { class: "approval-card", "data-request": request.id },
    el("h4", {}, `${request.kind} request ${request.id}`),
    el("p", {}, request.text || lines || "(no text)"),
    el("p", { class: "muted" }, `route: ${request.approvals.length}/${request.route.length} approved`),
    el("input", { class: "decision-note", placeholder: "Note to the requester" }),
    el("button", { class: "approve-button" }, "Approve"),
    el("button", { class: "reject-button" }, "Reject"),
  );

  const decide = async (decision: "approve" | "reject") => {
    clearError(page);
    const confirmed = await confirmDialog(
      decision === "approve"
        ? `Approve ${request.id}?`
        : `Reject ${request.id}?`,
    );
    if (!confirmed) return;
    const note = (card.querySelector(".decision-note") as HTMLInputElement).value;
    try {
      if (decision === "approve") await ctx.api.approve(request.id, note);
      else await ctx.api.reject(request.id, note);
      card.remove();
      if (!listHost.querySelector(".approval-card")) {
        listHost.append(el("p", { class: "muted", id: "queue-empty" }, "Nothing waiting."));
      }
    } catch (error) {
      if (error instanceof ApiError) errorBox(page, error.detail);
      else throw error;
    }
  };

  card.querySelector(".approve-button")!.addEventListener("click", () => decide("approve"));
  card.querySelector(".reject-button")!.addEventListener("click", () => decide("reject"));
  return card;
}
