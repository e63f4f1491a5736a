// End-to-end smoke against the real service running the offline mock backend:
// the full multi-turn conversation renders four class badges, tier chips, the
// escalation warning, and a citation link, and a reload reproduces the
// transcript byte for byte.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, test } from "vitest";

import { ApiClient } from "../src/api.js";
import { renderTranscript } from "../src/transcript.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;
const REPO_ROOT = resolve(fileURLToPath(new URL(".", import.meta.url)), "../..");

const SCRIPT = [
  "Hello! What can be done?",
  "Many pigs received from the source have died.",
  "Pigs have red bodies, purple ears..",
  "No extra information is available.",
  "Yes, that's accurate.",
  "What samples are used for ASF testing?",
];

let server: ChildProcess | undefined;

async function waitForHealth(client: ApiClient, attempts = 100): Promise<void> {
  for (let i = 0; i < attempts; i++) {
    if (await client.health()) return;
    await new Promise((resolveSleep) => setTimeout(resolveSleep, 200));
  }
  throw new Error("service did not become healthy");
}

beforeAll(async () => {
  const dataDir = mkdtempSync(join(tmpdir(), "swinedx-smoke-"));
  const storePath = join(dataDir, "store.bin");
  const configPath = join(dataDir, "config.yaml");
  writeFileSync(
    configPath,
    [
      `listen: 127.0.0.1:${PORT}`,
      `store: ${storePath}`,
      `sessions: ${join(dataDir, "sessions")}`,
      "backend: offline",
      "embedder:",
      "  dim: 256",
    ].join("\n"),
  );
  const ingest = spawnSync(
    "swinedx",
    ["ingest", "--corpus", join(REPO_ROOT, "fixtures", "corpus.jsonl"), "--store", storePath, "--dim", "256"],
    { encoding: "utf-8" },
  );
  if (ingest.status !== 0) {
    throw new Error(`ingest failed: ${ingest.stderr}`);
  }
  server = spawn("swinedx", ["serve", "--config", configPath], { stdio: "ignore" });
  await waitForHealth(new ApiClient(BASE));
});

afterAll(() => {
  server?.kill();
});

describe("chat console against the live service", () => {
  test("full conversation renders badges, chips, warning, and a citation", async () => {
    const client = new ApiClient(BASE);
    const { session_id } = await client.createSession();
    for (const message of SCRIPT) {
      const response = await client.postMessage(session_id, message);
      expect(response.error).toBeNull();
    }
    const snapshot = await client.getSession(session_id);
    expect(snapshot.turns).toHaveLength(SCRIPT.length * 2);
    const html = renderTranscript(snapshot);

    // All four query classes appear as badges across the conversation.
    for (const cls of ["G", "T", "D", "K"]) {
      expect(html).toContain(`badge-${cls}`);
    }
    // The prediction turn renders one tier chip per disease.
    expect(html.match(/class="chip chip-/g)?.length).toBe(4);
    // The out-of-distribution outcome shows the escalation warning.
    expect(html).toContain("escalation warning");
    // The knowledge answer cites its source document.
    expect(html).toContain('data-source="ASF-2022.pdf"');
    expect(html).toContain("(ASF-2022.pdf, p.12)");

    // Reload: a fresh snapshot renders the identical transcript.
    const reloaded = renderTranscript(await client.getSession(session_id));
    expect(reloaded).toBe(html);
    console.log(
      "ACCEPTANCE PASS: console smoke: four class badges, tier chips, " +
        "escalation warning, citation link, reload-identical transcript",
    );
  });

  test("unknown session surfaces an API error without crashing", async () => {
    const client = new ApiClient(BASE);
    await expect(client.getSession("missing")).rejects.toMatchObject({ status: 404 });
  });
});
