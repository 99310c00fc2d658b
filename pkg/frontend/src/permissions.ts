// The session's effective permission set, as fetched from the server, and
// the navigation gating rules derived from it. The server stays the
// authority; these checks only decide what controls get rendered.

import type { ScopedPermission } from "./types.js";

export class PermissionSet {
  constructor(readonly permissions: ScopedPermission[]) {}

  has(action: string): boolean {
    return this.permissions.some((p) => p.action === action);
  }

  scopesFor(action: string): ScopedPermission[] {
    return this.permissions.filter((p) => p.action === action);
  }

  get all(): ScopedPermission[] {
    return [...this.permissions];
  }
}

export interface NavEntry {
  id: string;
  label: string;
  hash: string;
}

/** Navigation entries the session may see. A control never renders for an
 * operation the effective permissions forbid. */
export function visibleNav(permissions: PermissionSet): NavEntry[] {
  const entries: NavEntry[] = [
    { id: "requests", label: "My Requests", hash: "#/requests" },
  ];
  // approvers fill slots; asset:edit holders confirm executions
  if (permissions.has("request:approve") || permissions.has("asset:edit")) {
    entries.push({ id: "approvals", label: "Approvals", hash: "#/approvals" });
  }
  if (permissions.has("asset:list")) {
    entries.push({ id: "assets", label: "Assets", hash: "#/assets" });
  }
  if (permissions.has("report:show")) {
    entries.push({ id: "reports", label: "Reports", hash: "#/reports" });
  }
  if (canDelegate(permissions)) {
    entries.push({ id: "admin", label: "Delegation", hash: "#/admin" });
  }
  return entries;
}

/** A bare level-0 set (request:create only) has nothing worth delegating;
 * anyone holding more may pass a part of it on. */
export function canDelegate(permissions: PermissionSet): boolean {
  return permissions.all.length > 1;
}

/** Advanced and exception request forms need search authority. */
export function canUseAdvancedForms(permissions: PermissionSet): boolean {
  return permissions.has("search:simple");
}
