import { ApiClient } from "./api.js";
import { renderTranscript } from "./transcript.js";

// DOM glue. One active session per tab, at most one in-flight message: the
// input stays locked until the service answers. Every render goes through
// the session snapshot, never through locally accumulated state.

function baseUrl(): string {
  const meta = document.querySelector('meta[name="swinedx-base-url"]');
  return meta?.getAttribute("content") ?? "http://127.0.0.1:8080";
}

export class ChatApp {
  private api: ApiClient;
  private sessionId: string | null = null;
  private busy = false;

  constructor(
    private transcript: HTMLElement,
    private input: HTMLInputElement,
    private sendButton: HTMLButtonElement,
    private banner: HTMLElement,
    api?: ApiClient,
  ) {
    this.api = api ?? new ApiClient(baseUrl());
  }

  async start(): Promise<void> {
    if (!(await this.api.health())) {
      this.showBanner("Service unreachable.");
      return;
    }
    this.banner.hidden = true;
    const fromUrl = new URLSearchParams(window.location.search).get("session");
    if (fromUrl) {
      try {
        await this.api.getSession(fromUrl);
        this.sessionId = fromUrl;
      } catch {
        this.sessionId = null;
      }
    }
    if (!this.sessionId) {
      const created = await this.api.createSession();
      this.sessionId = created.session_id;
      const url = new URL(window.location.href);
      url.searchParams.set("session", this.sessionId);
      window.history.replaceState(null, "", url.toString());
    }
    await this.refresh();
    this.updateControls();
  }

  private showBanner(message: string): void {
    this.banner.hidden = false;
    this.banner.innerHTML = `${message} <button id="retry">Retry</button>`;
    this.banner.querySelector("#retry")?.addEventListener("click", () => void this.start());
  }

  private async refresh(): Promise<void> {
    if (!this.sessionId) return;
    const snapshot = await this.api.getSession(this.sessionId);
    this.transcript.innerHTML = renderTranscript(snapshot);
    this.transcript.scrollTop = this.transcript.scrollHeight;
  }

  updateControls(): void {
    const empty = this.input.value.trim().length === 0;
    this.sendButton.disabled = this.busy || empty || !this.sessionId;
    this.input.disabled = this.busy;
  }

  async send(): Promise<void> {
    const text = this.input.value.trim();
    if (!text || this.busy || !this.sessionId) return;
    this.busy = true;
    this.updateControls();
    try {
      await this.api.postMessage(this.sessionId, text);
      this.input.value = "";
      await this.refresh();
    } catch (error) {
      this.transcript.insertAdjacentHTML(
        "beforeend",
        `<div class="turn system error-chip">request failed: ${String(error)}</div>`,
      );
    } finally {
      this.busy = false;
      this.updateControls();
    }
  }
}

export function boot(): void {
  const app = new ChatApp(
    document.getElementById("transcript") as HTMLElement,
    document.getElementById("message") as HTMLInputElement,
    document.getElementById("send") as HTMLButtonElement,
    document.getElementById("banner") as HTMLElement,
  );
  const input = document.getElementById("message") as HTMLInputElement;
  const send = document.getElementById("send") as HTMLButtonElement;
  input.addEventListener("input", () => app.updateControls());
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") void app.send();
  });
  send.addEventListener("click", () => void app.send());
  void app.start();
}

if (typeof document !== "undefined" && document.getElementById("transcript")) {
  boot();
}
