// Session handling. Only the token and the user's identity are persisted;
// everything else (permissions, domain data) is re-fetched from the server.

const STORAGE_KEY = "uuis.session";

export interface StoredSession {
  token: string;
  userId: string;
  username: string;
}

export class SessionStore {
  private current: StoredSession | null = null;

  constructor(private storage: Storage = window.localStorage) {
    const raw = storage.getItem(STORAGE_KEY);
    if (raw) {
      try {
        this.current = JSON.parse(raw) as StoredSession;
      } catch {
        storage.removeItem(STORAGE_KEY);
      }
    }
  }

  get(): StoredSession | null {
    return this.current;
  }

  token(): string | null {
    return this.current?.token ?? null;
  }

  set(session: StoredSession): void {
    this.current = session;
    this.storage.setItem(STORAGE_KEY, JSON.stringify(session));
  }

  clear(): void {
    this.current = null;
    this.storage.removeItem(STORAGE_KEY);
  }
}
