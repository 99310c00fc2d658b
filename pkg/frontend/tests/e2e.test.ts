// End-to-end against a live server: a level-0 user files a basic request,
// the department admin approves it from the queue and delegates execution,
// the delegate confirms the hand-over, and the requester sees it executed.
// The outbox drain at the end shows exactly one notification line for the
// approval. Driven through the real page components (jsdom DOM + real HTTP).

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, existsSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Api } from "../src/api.js";
import { boot } from "../src/main.js";
import { flush } from "./fakes.js";

const PORT = 8917;
const BASE = `http://127.0.0.1:${PORT}`;

const serverAvailable =
  spawnSync("python3", ["-c", "import uuis"], { encoding: "utf-8" }).status === 0;

const suite = serverAvailable ? describe : describe.skip;

let workDir: string;
let storePath: string;
let serverProc: ChildProcess | null = null;

function cli(...args: string[]): void {
  const result = spawnSync("python3", ["-m", "uuis.cli", "--store", storePath, ...args], {
    encoding: "utf-8",
  });
  if (result.status !== 0) {
    throw new Error(`cli ${args[0]} failed: ${result.stderr}`);
  }
}

async function startServer(): Promise<void> {
  serverProc = spawn(
    "python3",
    ["-m", "uuis.cli", "--store", storePath, "serve", "--addr", `127.0.0.1:${PORT}`],
    { stdio: "ignore" },
  );
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      const ping = await fetch(`${BASE}/api/asset-types`);
      if (ping.status === 401) return; // up, demands auth
    } catch {
      // not listening yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error("server never came up");
}

async function stopServer(): Promise<void> {
  if (!serverProc) return;
  const proc = serverProc;
  serverProc = null;
  proc.kill("SIGTERM");
  await new Promise((resolve) => {
    proc.once("exit", resolve);
    setTimeout(resolve, 3000);
  });
}

interface Seeded {
  deptId: string;
  helperId: string;
}

async function seed(): Promise<Seeded> {
  // raw-API setup as the IT operator; the UI flow below does the real work
  const login = await fetch(`${BASE}/api/sessions`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ username: "it", password: "it-pass" }),
  });
  const token = ((await login.json()) as { token: string }).token;
  const as = async (method: string, path: string, body: unknown) => {
    const response = await fetch(`${BASE}/api${path}`, {
      method,
      headers: {
        "Content-Type": "application/json",
        Authorization: `Bearer ${token}`,
      },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw new Error(`seed ${path}: ${response.status} ${await response.text()}`);
    }
    return (await response.json()) as Record<string, string>;
  };
  const units = await fetch(`${BASE}/api/org-units`, {
    headers: { Authorization: `Bearer ${token}` },
  });
  const rootId = ((await units.json()) as { items: { id: string }[] }).items[0]!.id;
  const faculty = await as("POST", "/org-units", {
    name: "Science", kind: "faculty", parent_id: rootId,
  });
  const dept = await as("POST", "/org-units", {
    name: "Chemistry", kind: "department", parent_id: faculty["id"],
  });
  await as("POST", "/users", {
    username: "da", password: "da-pass", level: 1, home_unit_id: dept["id"],
  });
  await as("POST", "/users", {
    username: "stu", password: "stu-pass", level: 0, home_unit_id: dept["id"],
  });
  const helper = await as("POST", "/users", {
    username: "helper", password: "helper-pass", level: 0, home_unit_id: dept["id"],
  });
  await as("POST", "/asset-types", {
    name: "projector", kind: "other", common_properties: ["lumens"],
  });
  await as("POST", "/locations", {
    building: "H", floor: "8", room: "801", owner_unit_id: dept["id"],
  });
  await as("POST", "/assets", {
    serial_number: "SN-E2E-1", type: "projector", owner_unit_id: dept["id"],
  });
  return { deptId: dept["id"], helperId: helper["id"] };
}

function appRoot(): HTMLElement {
  document.body.innerHTML = "<div id='app'></div>";
  return document.getElementById("app")!;
}

async function uiLogin(root: HTMLElement, username: string, password: string) {
  window.localStorage.clear();
  window.location.hash = "";
  await boot(root, BASE);
  (root.querySelector("#login-username") as HTMLInputElement).value = username;
  (root.querySelector("#login-password") as HTMLInputElement).value = password;
  root.querySelector("#login-form")!.dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }));
  for (let i = 0; i < 50 && !root.querySelector("#main-nav"); i++) {
    await flush();
    await new Promise((resolve) => setTimeout(resolve, 50));
  }
  expect(root.querySelector("#main-nav")).not.toBeNull();
}

async function waitFor(root: HTMLElement, selector: string): Promise<HTMLElement> {
  for (let i = 0; i < 60; i++) {
    const found = root.querySelector(selector);
    if (found) return found as HTMLElement;
    await new Promise((resolve) => setTimeout(resolve, 50));
  }
  throw new Error(`never rendered: ${selector} (html: ${root.innerHTML.slice(0, 400)})`);
}

suite("end-to-end against a live server", () => {
  let seeded: Seeded;

  beforeAll(async () => {
    workDir = mkdtempSync(join(tmpdir(), "uuis-e2e-"));
    storePath = join(workDir, "store.json");
    cli("init", "--admin-user", "it", "--admin-pass", "it-pass");
    await startServer();
    seeded = await seed();
  }, 120_000);

  afterAll(async () => {
    await stopServer();
  });

  it("request -> approve -> delegate -> execute -> requester sees executed", async () => {
    // --- the DA delegates execution authority through the admin page
    let root = appRoot();
    await uiLogin(root, "da", "da-pass");
    window.location.hash = "#/admin";
    window.dispatchEvent(new Event("hashchange"));
    await waitFor(root, "#permission-picker");
    (root.querySelector("#grantee-input") as HTMLInputElement).value = seeded.helperId;
    root.querySelectorAll(".permission-check").forEach((box) => {
      const input = box as HTMLInputElement;
      if (input.value === `asset:edit@${seeded.deptId}`
          || input.value === `request:list@${seeded.deptId}`) {
        input.checked = true;
      }
    });
    (root.querySelector("#grant-submit") as HTMLElement).click();
    await waitFor(root, ".grant-created");

    // flush the delegation notification into a setup outbox, with the
    // server stopped so the drain cannot be overwritten by later commits
    await stopServer();
    cli("drain-outbox", join(workDir, "setup-outbox.jsonl"));
    await startServer();

    // --- the level-0 requester files a basic request from the wizard
    root = appRoot();
    await uiLogin(root, "stu", "stu-pass");
    await waitFor(root, "#request-wizard");
    expect(root.querySelector("#request-form-picker")).toBeNull(); // basic only
    (root.querySelector("#request-text") as HTMLTextAreaElement).value =
      "please lend me SN-E2E-1";
    root.querySelector("#request-create-form")!.dispatchEvent(
      new Event("submit", { bubbles: true, cancelable: true }));
    await waitFor(root, ".data-table");
    expect(root.querySelector("#request-list")!.textContent).toContain("pending");

    // --- the DA approves it from the queue, confirmation dialog included
    root = appRoot();
    await uiLogin(root, "da", "da-pass");
    window.location.hash = "#/approvals";
    window.dispatchEvent(new Event("hashchange"));
    await waitFor(root, ".approve-button");
    (root.querySelector(".approve-button") as HTMLElement).click();
    const confirmButton = await waitFor(document.body as HTMLElement, ".confirm-yes");
    confirmButton.click();
    await waitFor(root, "#queue-empty"); // removed in place, no reload

    // --- the delegate confirms the hand-over from the execution list
    root = appRoot();
    await uiLogin(root, "helper", "helper-pass");
    const helperNav = [...root.querySelectorAll("[data-nav]")].map(
      (a) => a.getAttribute("data-nav"));
    expect(helperNav).toContain("approvals"); // via the delegated asset:edit
    window.location.hash = "#/approvals";
    window.dispatchEvent(new Event("hashchange"));
    await waitFor(root, ".execute-button");
    expect(root.querySelector(".approve-button")).toBeNull(); // no approve grant
    (root.querySelector(".execute-button") as HTMLElement).click();
    (await waitFor(document.body as HTMLElement, ".confirm-yes")).click();
    await waitFor(root, "#execution-empty");

    // --- the requester sees the executed status
    root = appRoot();
    await uiLogin(root, "stu", "stu-pass");
    const table = await waitFor(root, ".data-table");
    expect(table.textContent).toContain("executed");

    // --- exactly one notification line: the approval, to the requester
    await stopServer();
    const outboxPath = join(workDir, "flow-outbox.jsonl");
    cli("drain-outbox", outboxPath);
    expect(existsSync(outboxPath)).toBe(true);
    const lines = readFileSync(outboxPath, "utf-8").trim().split("\n");
    expect(lines.length).toBe(1);
    const note = JSON.parse(lines[0]!) as { subject: string; body: string };
    expect(note.subject).toContain("approved");
  }, 120_000);
});
