import type { Api } from "./api.js";
import type { PermissionSet } from "./permissions.js";
import type { SessionStore } from "./session.js";

/** Everything a page needs: the API, who is logged in, what they hold. */
export interface AppContext {
  api: Api;
  session: SessionStore;
  permissions: PermissionSet;
  navigate(hash: string): void;
}
