import { useCallback, useMemo, useRef, useState } from "react";
import { AdvisorClient, ApiError } from "./api";
import { CampaignView, EntropyPoint, appendSnapshot, buildView } from "./campaign";
import { defaultRoster } from "./format";
import { Recommendation, SessionConfig, SessionState } from "./types";

export interface CampaignHook {
  phase: "setup" | "running";
  view: CampaignView | null;
  recommendation: Recommendation | null;
  error: string | null;
  busy: boolean;
  /** True after a 409; the submission form stays disabled until retry clears it. */
  conflicted: boolean;
  start: (config: SessionConfig) => Promise<void>;
  submitResult: (outcome: 0 | 1, overrideGroup?: number[]) => Promise<void>;
  retry: () => Promise<void>;
  discard: () => Promise<void>;
}

interface LiveSession {
  client: AdvisorClient;
  id: string;
  roster: string[];
}

export function useCampaign(baseUrl: string): CampaignHook {
  const session = useRef<LiveSession | null>(null);
  const [state, setState] = useState<SessionState | null>(null);
  const [entropySeries, setEntropySeries] = useState<EntropyPoint[]>([]);
  const [recommendation, setRecommendation] = useState<Recommendation | null>(null);
  const [error, setError] = useState<string | null>(null);
  const [busy, setBusy] = useState(false);
  const [conflicted, setConflicted] = useState(false);

  const refresh = useCallback(async () => {
    const live = session.current;
    if (!live) return;
    const snapshot = await live.client.getState(live.id);
    setEntropySeries((prev) => appendSnapshot(prev, snapshot));
    setState(snapshot);
    if (snapshot.status === "stopped") {
      setRecommendation(null);
      return;
    }
    try {
      setRecommendation(await live.client.getRecommendation(live.id));
    } catch (err) {
      // the session can hit its stopping rule between the two requests
      if (err instanceof ApiError && err.status === 409) {
        setRecommendation(null);
        return;
      }
      throw err;
    }
  }, []);

  const start = useCallback(
    async (config: SessionConfig) => {
      setBusy(true);
      setError(null);
      try {
        const client = new AdvisorClient(baseUrl);
        const id = await client.createSession(config);
        session.current = { client, id, roster: defaultRoster(config.n) };
        setEntropySeries([]);
        setConflicted(false);
        await refresh();
      } catch (err) {
        setError(err instanceof Error ? err.message : String(err));
      } finally {
        setBusy(false);
      }
    },
    [baseUrl, refresh],
  );

  const submitResult = useCallback(
    async (outcome: 0 | 1, overrideGroup?: number[]) => {
      const live = session.current;
      if (!live) return;
      const group = overrideGroup ?? recommendation?.group;
      if (!group) {
        setError("no pool to report a result for");
        return;
      }
      setBusy(true);
      setError(null);
      try {
        await live.client.postResult(live.id, {
          group,
          outcome,
          override: overrideGroup !== undefined,
        });
        await refresh();
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          setConflicted(true);
        }
        setError(err instanceof Error ? err.message : String(err));
      } finally {
        setBusy(false);
      }
    },
    [recommendation, refresh],
  );

  const retry = useCallback(async () => {
    setBusy(true);
    setError(null);
    try {
      await refresh();
      setConflicted(false);
    } catch (err) {
      setError(err instanceof Error ? err.message : String(err));
    } finally {
      setBusy(false);
    }
  }, [refresh]);

  const discard = useCallback(async () => {
    const live = session.current;
    session.current = null;
    setState(null);
    setRecommendation(null);
    setEntropySeries([]);
    setError(null);
    setConflicted(false);
    if (live) {
      try {
        await live.client.deleteSession(live.id);
      } catch {
        // the local reset already happened; a failed delete is not actionable
      }
    }
  }, []);

  const view = useMemo(() => {
    if (!state || !session.current) return null;
    return buildView(state, entropySeries, session.current.roster);
  }, [state, entropySeries]);

  return {
    phase: state === null ? "setup" : "running",
    view,
    recommendation,
    error,
    busy,
    conflicted,
    start,
    submitResult,
    retry,
    discard,
  };
}
