import { HistoryEntry, SessionState } from "./types";

export interface MarginalRow {
  index: number;
  label: string;
  prob: number;
}

export interface EntropyPoint {
  testsRecorded: number;
  entropyBits: number;
}

export interface HistoryRow {
  testNumber: number;
  group: number[];
  outcome: 0 | 1;
  override: boolean;
}

/**
 * Everything the screen shows for a running session. Built purely from
 * service responses: the last GET /state plus the entropy points remembered
 * from earlier snapshots. Nothing in here recomputes posterior quantities.
 */
export interface CampaignView {
  roster: string[];
  marginals: MarginalRow[];
  ranked: MarginalRow[];
  entropySeries: EntropyPoint[];
  thresholdBits: number;
  history: HistoryRow[];
  status: "active" | "stopped";
}

/** Record the snapshot's entropy, replacing any stale point at the same test count. */
export function appendSnapshot(series: EntropyPoint[], state: SessionState): EntropyPoint[] {
  const point: EntropyPoint = {
    testsRecorded: state.history.length,
    entropyBits: state.entropy_bits,
  };
  const kept = series.filter((p) => p.testsRecorded !== point.testsRecorded);
  kept.push(point);
  kept.sort((a, b) => a.testsRecorded - b.testsRecorded);
  return kept;
}

export function rankMarginals(rows: MarginalRow[]): MarginalRow[] {
  return [...rows].sort((a, b) => b.prob - a.prob || a.index - b.index);
}

function historyRows(entries: HistoryEntry[]): HistoryRow[] {
  return entries.map((entry, i) => ({
    testNumber: i + 1,
    group: entry.group,
    outcome: entry.outcome,
    override: entry.override,
  }));
}

export function buildView(
  state: SessionState,
  entropySeries: EntropyPoint[],
  roster: string[],
): CampaignView {
  const marginals = state.marginals.map((prob, index) => ({
    index,
    label: roster[index] ?? `#${index}`,
    prob,
  }));
  return {
    roster,
    marginals,
    ranked: rankMarginals(marginals),
    entropySeries,
    thresholdBits: state.delta_threshold_bits,
    history: historyRows(state.history),
    status: state.status,
  };
}
