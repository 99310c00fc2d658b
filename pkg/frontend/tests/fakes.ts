// Test doubles: a canned API and permission fixtures mirroring the server's
// per-level defaults.

import { ApiError, type Api, type RequestCreateBody } from "../src/api.js";
import type { AppContext } from "../src/context.js";
import { PermissionSet } from "../src/permissions.js";
import { SessionStore } from "../src/session.js";
import type { RequestDoc, ScopedPermission } from "../src/types.js";

const ADMIN_ACTIONS = [
  "request:create", "request:list", "request:show", "request:edit", "request:approve",
  "asset:create", "asset:list", "asset:show", "asset:edit",
  "location:create", "location:list", "location:show", "location:edit", "location:delete",
  "search:simple", "search:advanced", "report:list", "report:show",
  "user:list", "user:show",
];

const ALL_ACTIONS = [
  ...ADMIN_ACTIONS,
  "universityPart:create", "universityPart:list", "universityPart:show",
  "universityPart:edit", "universityPart:delete",
  "user:edit", "audit:list", "audit:show",
];

export function personaPermissions(level: 0 | 1 | 2 | 3 | 4): ScopedPermission[] {
  const scope = { 0: "ou-d1", 1: "ou-d1", 2: "ou-f1", 3: "ou-root", 4: "ou-root" }[level];
  const actions =
    level === 0
      ? ["request:create"]
      : level <= 2
        ? ADMIN_ACTIONS
        : level === 3
          ? [...ADMIN_ACTIONS, "universityPart:create", "universityPart:list",
             "universityPart:show", "universityPart:edit", "universityPart:delete",
             "user:edit"]
          : ALL_ACTIONS;
  return actions.map((action) => ({
    action,
    scope_unit_id: scope,
    scope_unit_name: scope,
  }));
}

export function sampleRequest(overrides: Partial<RequestDoc> = {}): RequestDoc {
  return {
    id: "req-000001",
    requester_id: "usr-000009",
    form: "basic",
    kind: "borrow",
    text: "need a projector",
    lines: [{ asset_serial: "SN-PRJ-1", location_id: null, note: "" }],
    route: [{ required_level: 1, scope_unit_id: "ou-d1" }],
    approvals: [],
    status: "pending",
    created_at: "2026-01-01T00:00:00+00:00",
    resolved_at: null,
    ...overrides,
  };
}

/** Canned Api: records calls, returns fixture data, optionally fails. */
export class FakeApi {
  calls: { method: string; args: unknown[] }[] = [];
  pending: RequestDoc[] = [];
  requests: RequestDoc[] = [];
  failWith: ApiError | null = null;

  private maybeFail() {
    if (this.failWith) throw this.failWith;
  }

  async login(username: string, _password: string) {
    this.calls.push({ method: "login", args: [username] });
    this.maybeFail();
    return {
      token: "tok-1",
      expires_at: "2026-01-02T00:00:00+00:00",
      user: { id: "usr-1", username, level: 0, home_unit_id: "ou-d1", active: true },
    };
  }

  async logout() {
    this.calls.push({ method: "logout", args: [] });
  }

  async permissionsOf(userId: string) {
    this.calls.push({ method: "permissionsOf", args: [userId] });
    return { user_id: userId, level: 0, permissions: personaPermissions(0) };
  }

  async listRequests(_status?: string) {
    this.calls.push({ method: "listRequests", args: [_status] });
    return { items: this.requests };
  }

  async createRequest(body: RequestCreateBody) {
    this.calls.push({ method: "createRequest", args: [body] });
    this.maybeFail();
    const created = sampleRequest({ id: `req-${this.requests.length + 1}` });
    this.requests.push(created);
    return created;
  }

  async pendingApprovals() {
    this.calls.push({ method: "pendingApprovals", args: [] });
    return { items: this.pending };
  }

  async approve(requestId: string, note: string) {
    this.calls.push({ method: "approve", args: [requestId, note] });
    this.maybeFail();
    return sampleRequest({ id: requestId, status: "awaiting_execution" });
  }

  async reject(requestId: string, note: string) {
    this.calls.push({ method: "reject", args: [requestId, note] });
    this.maybeFail();
    return sampleRequest({ id: requestId, status: "rejected" });
  }

  async cancel(requestId: string) {
    this.calls.push({ method: "cancel", args: [requestId] });
    return sampleRequest({ id: requestId, status: "cancelled" });
  }

  async execute(requestId: string) {
    this.calls.push({ method: "execute", args: [requestId] });
    return sampleRequest({ id: requestId, status: "executed" });
  }

  async search(params: Record<string, string>) {
    this.calls.push({ method: "search", args: [params] });
    this.maybeFail();
    return { total: 0, offset: 0, limit: 100, items: [] };
  }

  async report(kind: string, filters: Record<string, string>, sort?: string) {
    this.calls.push({ method: "report", args: [kind, filters, sort] });
    this.maybeFail();
    return { kind, columns: ["a"], rows: [] };
  }

  async reportCsv(kind: string, filters: Record<string, string>) {
    this.calls.push({ method: "reportCsv", args: [kind, filters] });
    return "a\n";
  }

  async getUser(userId: string) {
    this.calls.push({ method: "getUser", args: [userId] });
    return { id: userId, username: "someone", level: 0, home_unit_id: "ou-d1", active: true };
  }

  async listUsers() {
    this.calls.push({ method: "listUsers", args: [] });
    return { items: [] };
  }

  async listOrgUnits() {
    this.calls.push({ method: "listOrgUnits", args: [] });
    return { items: [] };
  }

  async createGrant(granteeId: string, permissions: string[]) {
    this.calls.push({ method: "createGrant", args: [granteeId, permissions] });
    this.maybeFail();
    return {
      id: "grt-000001", grantor_id: "usr-1", grantee_id: granteeId,
      permissions, created_at: "2026-01-01T00:00:00+00:00", revoked_at: null,
    };
  }
}

export function makeContext(level: 0 | 1 | 2 | 3 | 4, api?: FakeApi): AppContext {
  const session = new SessionStore(window.localStorage);
  session.set({ token: "tok-1", userId: "usr-1", username: `level${level}` });
  return {
    api: (api ?? new FakeApi()) as unknown as Api,
    session,
    permissions: new PermissionSet(personaPermissions(level)),
    navigate: (hash: string) => {
      window.location.hash = hash;
    },
  };
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
