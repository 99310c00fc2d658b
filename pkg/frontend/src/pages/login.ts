import { ApiError, type Api } from "../api.js";
import type { SessionStore } from "../session.js";
import { clear, el, errorBox } from "../ui.js";

export function renderLogin(
  root: HTMLElement,
  api: Api,
  session: SessionStore,
  onLoggedIn: () => void,
): void {
  clear(root);
  const form = el(
    "form",
    { class: "login-form", id: "login-form" },
    el("h1", {}, "UUIS"),
    el("label", { for: "login-username" }, "Username"),
    el("input", { id: "login-username", name: "username", autocomplete: "username" }),
    el("label", { for: "login-password" }, "Password"),
    el("input", {
      id: "login-password",
      name: "password",
      type: "password",
      autocomplete: "current-password",
    }),
    el("button", { type: "submit", id: "login-submit" }, "Log in"),
  );
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const username = (form.querySelector("#login-username") as HTMLInputElement).value;
    const password = (form.querySelector("#login-password") as HTMLInputElement).value;
    try {
      const response = await api.login(username, password);
      session.set({
        token: response.token,
        userId: response.user.id,
        username: response.user.username,
      });
      onLoggedIn();
    } catch (error) {
      if (error instanceof ApiError) {
        errorBox(root, error.detail);
      } else {
        errorBox(root, "Cannot reach the server.");
      }
    }
  });
  root.append(form);
}
