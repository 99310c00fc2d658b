// Hash router plus the permission-gated shell (nav + outlet).

import { ApiError } from "./api.js";
import type { AppContext } from "./context.js";
import { visibleNav } from "./permissions.js";
import { renderAdmin } from "./pages/admin.js";
import { renderApprovals } from "./pages/approvals.js";
import { renderAssets } from "./pages/assets.js";
import { renderReports } from "./pages/reports.js";
import { renderRequests } from "./pages/requests.js";
import { clear, el, errorBox } from "./ui.js";

type PageRenderer = (root: HTMLElement, ctx: AppContext) => void | Promise<void>;

const PAGES: Record<string, PageRenderer> = {
  "#/requests": renderRequests,
  "#/approvals": renderApprovals,
  "#/assets": renderAssets,
  "#/reports": renderReports,
  "#/admin": renderAdmin,
};

// one shell at a time: a re-render (new login) replaces the old listener
let activeHashListener: (() => void) | null = null;

export function renderShell(root: HTMLElement, ctx: AppContext, onLogout: () => void): void {
  if (activeHashListener) {
    window.removeEventListener("hashchange", activeHashListener);
    activeHashListener = null;
  }
  clear(root);
  const nav = el("nav", { id: "main-nav" });
  const allowed = visibleNav(ctx.permissions);
  for (const entry of allowed) {
    nav.append(el("a", { href: entry.hash, "data-nav": entry.id }, entry.label));
  }
  const whoami = ctx.session.get();
  const logout = el("button", { id: "logout-button" }, `Log out (${whoami?.username ?? ""})`);
  logout.addEventListener("click", onLogout);
  nav.append(logout);
  const outlet = el("main", { id: "outlet" });
  root.append(nav, outlet);

  const show = () => {
    const hash = window.location.hash || "#/requests";
    const permitted = allowed.some((entry) => entry.hash === hash);
    const target = permitted ? hash : "#/requests";
    const renderer = PAGES[target] ?? renderRequests;
    Promise.resolve(renderer(outlet, ctx)).catch((error) => {
      // a 401 already routed back to login; anything else shows inline
      if (!(error instanceof ApiError && error.status === 401)) {
        errorBox(outlet, error instanceof ApiError ? error.detail : String(error));
      }
    });
  };
  activeHashListener = show;
  window.addEventListener("hashchange", show);
  show();
}
