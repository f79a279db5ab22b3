// @vitest-environment node
//
// Round trip against the real service: spawns the API, replays the golden
// session through the client, and expects every number to come back exactly
// as recorded. Needs the Python package installed (gt on PATH).
import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { AdvisorClient, ApiError } from "../src/api";
import { transcript } from "./transcript";

const PORT = 8831;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let stateDir: string;

async function waitForServer(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      // any response at all means the server is up; this id does not exist
      const res = await fetch(`${BASE}/v1/sessions/warmup/state`);
      if (res.status === 404) return;
    } catch {
      await new Promise((r) => setTimeout(r, 200));
    }
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  stateDir = mkdtempSync(join(tmpdir(), "advisor-live-"));
  server = spawn("gt", ["serve", "--port", String(PORT), "--state-dir", stateDir], {
    stdio: "ignore",
  });
  await waitForServer();
});

afterAll(async () => {
  server.kill("SIGTERM");
  await new Promise((resolve) => {
    server.once("exit", resolve);
    setTimeout(resolve, 3000);
  });
  rmSync(stateDir, { recursive: true, force: true });
});

describe("golden session against the live service", () => {
  it("reproduces the recorded transcript number for number", async () => {
    const client = new AdvisorClient(BASE);
    const { config } = transcript;
    const sessionId = await client.createSession({
      n: config.n,
      q: config.q,
      s: config.s,
      sigma: config.sigma,
      delta: config.delta,
      maxTests: config.max_tests,
    });

    const initial = await client.getState(sessionId);
    expect(initial).toEqual(transcript.initial_state);

    for (const step of transcript.steps) {
      const recommendation = await client.getRecommendation(sessionId);
      expect(recommendation).toEqual(step.recommendation);

      const ack = await client.postResult(sessionId, step.submission);
      expect(ack).toEqual(step.ack);

      const state = await client.getState(sessionId);
      expect(state).toEqual(step.state);
    }

    const first = transcript.steps[0]!;
    expect(first.recommendation.group).toHaveLength(7);
    const last = transcript.steps[transcript.steps.length - 1]!;
    expect(last.ack.stopped).toBe(true);
    expect(last.state.status).toBe("stopped");

    // once stopped, asking for another pool is a conflict
    const refusal = await client.getRecommendation(sessionId).then(
      () => null,
      (err) => err,
    );
    expect(refusal).toBeInstanceOf(ApiError);
    expect((refusal as ApiError).status).toBe(transcript.post_stop_recommendation_status);

    await client.deleteSession(sessionId);
    const gone = await client.getState(sessionId).then(
      () => null,
      (err) => err,
    );
    expect(gone).toBeInstanceOf(ApiError);
    expect((gone as ApiError).status).toBe(404);
  });

  it("reports field errors with a 400 and a named path", async () => {
    const client = new AdvisorClient(BASE);
    const bad = await client
      .createSession({ n: 0, q: 0.1, s: 0.8, sigma: 0.8, delta: 0.6, maxTests: 30 })
      .then(
        () => null,
        (err) => err,
      );
    expect(bad).toBeInstanceOf(ApiError);
    expect((bad as ApiError).status).toBe(400);
    expect((bad as ApiError).message).toContain("field 'n'");
  });
});
