import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));
const FIXTURES = join(here, "..", "..", "tests", "fixtures");

export function fixture(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf8");
}

export type LiveService = {
  base: string;
  stop: () => void;
};

// Boots the real analysis service on a free port and waits for readiness.
export async function startService(): Promise<LiveService> {
  const port = 8300 + Math.floor(Math.random() * 500);
  const store = mkdtempSync(join(tmpdir(), "goalrec-ui-"));
  const child: ChildProcess = spawn(
    "python3",
    ["-m", "goalrec.service", "--store", store, "--port", String(port)],
    { cwd: join(here, "..", ".."), stdio: "ignore" },
  );
  const base = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 20_000;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${base}/sessions/probe/findings`);
      if (res.status === 404) {
        return { base, stop: () => child.kill() };
      }
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  child.kill();
  throw new Error("analysis service did not come up in time");
}
