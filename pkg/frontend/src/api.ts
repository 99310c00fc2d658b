// Typed REST client. Every call carries the bearer token; API errors become
// ApiError so pages can render the server's detail inline.

import type {
  GrantDoc,
  LoginResponse,
  OrgUnit,
  PermissionsResponse,
  ReportTable,
  RequestDoc,
  SearchResponse,
  UserDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: string,
  ) {
    super(detail || code);
  }
}

export interface TokenSource {
  token(): string | null;
  onUnauthorized(): void;
}

export interface RequestCreateBody {
  form: string;
  kind: string;
  text: string;
  lines: { asset_serial?: string | null; location_id?: string | null; note?: string }[];
}

export class Api {
  constructor(
    private base: string,
    private tokens: TokenSource,
  ) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    const token = this.tokens.token();
    if (token) headers["Authorization"] = `Bearer ${token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const response = await fetch(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (response.status === 401 && path !== "/api/sessions") {
      this.tokens.onUnauthorized();
    }
    if (!response.ok) {
      let code = "error";
      let detail = response.statusText;
      try {
        const parsed = (await response.json()) as { error?: string; detail?: string };
        code = parsed.error ?? code;
        detail = parsed.detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, detail);
    }
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }

  login(username: string, password: string): Promise<LoginResponse> {
    return this.call("POST", "/api/sessions", { username, password });
  }

  logout(): Promise<void> {
    return this.call("DELETE", "/api/sessions");
  }

  permissionsOf(userId: string): Promise<PermissionsResponse> {
    return this.call("GET", `/api/users/${userId}/permissions`);
  }

  getUser(userId: string): Promise<UserDoc> {
    return this.call("GET", `/api/users/${userId}`);
  }

  listUsers(): Promise<{ items: UserDoc[] }> {
    return this.call("GET", "/api/users");
  }

  listOrgUnits(): Promise<{ items: OrgUnit[] }> {
    return this.call("GET", "/api/org-units");
  }

  listRequests(status?: string): Promise<{ items: RequestDoc[] }> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.call("GET", `/api/requests${query}`);
  }

  createRequest(body: RequestCreateBody): Promise<RequestDoc> {
    return this.call("POST", "/api/requests", body);
  }

  pendingApprovals(): Promise<{ items: RequestDoc[] }> {
    return this.call("GET", "/api/requests/pending");
  }

  approve(requestId: string, note: string): Promise<RequestDoc> {
    return this.call("POST", `/api/requests/${requestId}/approve`, { note });
  }

  reject(requestId: string, note: string): Promise<RequestDoc> {
    return this.call("POST", `/api/requests/${requestId}/reject`, { note });
  }

  cancel(requestId: string): Promise<RequestDoc> {
    return this.call("POST", `/api/requests/${requestId}/cancel`);
  }

  execute(requestId: string): Promise<RequestDoc> {
    return this.call("POST", `/api/requests/${requestId}/execute`);
  }

  search(params: Record<string, string>): Promise<SearchResponse> {
    const query = new URLSearchParams(params).toString();
    return this.call("GET", `/api/search?${query}`);
  }

  report(kind: string, filters: Record<string, string>, sort?: string): Promise<ReportTable> {
    const params = new URLSearchParams(filters);
    if (sort) params.set("sort", sort);
    const query = params.toString();
    return this.call("GET", `/api/reports/${kind}${query ? `?${query}` : ""}`);
  }

  async reportCsv(kind: string, filters: Record<string, string>): Promise<string> {
    const params = new URLSearchParams(filters).toString();
    const headers: Record<string, string> = { Accept: "text/csv" };
    const token = this.tokens.token();
    if (token) headers["Authorization"] = `Bearer ${token}`;
    const response = await fetch(
      `${this.base}/api/reports/${kind}${params ? `?${params}` : ""}`,
      { headers },
    );
    if (!response.ok) {
      throw new ApiError(response.status, "error", await response.text());
    }
    return response.text();
  }

  createGrant(granteeId: string, permissions: string[]): Promise<GrantDoc> {
    return this.call("POST", "/api/grants", {
      grantee_id: granteeId,
      permissions,
    });
  }
}
