// Application boot: restore the session, fetch the permission matrix, and
// hand over to the shell. Unauthenticated (or a 401 at any point) lands on
// the login page.

import { Api } from "./api.js";
import type { AppContext } from "./context.js";
import { renderLogin } from "./pages/login.js";
import { PermissionSet } from "./permissions.js";
import { renderShell } from "./router.js";
import { SessionStore } from "./session.js";

export async function boot(root: HTMLElement, baseUrl = ""): Promise<void> {
  const session = new SessionStore();
  const api = new Api(baseUrl, {
    token: () => session.token(),
    onUnauthorized: () => {
      session.clear();
      showLogin();
    },
  });

  const showLogin = () => {
    renderLogin(root, api, session, () => {
      void showApp();
    });
  };

  const showApp = async () => {
    const stored = session.get();
    if (!stored) {
      showLogin();
      return;
    }
    try {
      const matrix = await api.permissionsOf(stored.userId);
      const ctx: AppContext = {
        api,
        session,
        permissions: new PermissionSet(matrix.permissions),
        navigate: (hash) => {
          window.location.hash = hash;
        },
      };
      renderShell(root, ctx, () => {
        void api.logout().catch(() => undefined);
        session.clear();
        showLogin();
      });
    } catch {
      session.clear();
      showLogin();
    }
  };

  if (session.get()) {
    await showApp();
  } else {
    showLogin();
  }
}

declare global {
  interface Window {
    uuisBooted?: boolean;
  }
}

const rootElement = document.getElementById("app");
if (rootElement && !window.uuisBooted) {
  window.uuisBooted = true;
  void boot(rootElement);
}
