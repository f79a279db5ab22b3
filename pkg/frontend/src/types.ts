import { z } from "zod";

/** Setup values collected from the operator before a session starts. */
export interface SessionConfig {
  n: number;
  q: number;
  s: number;
  sigma: number;
  delta: number;
  maxTests: number;
}

export const recommendationSchema = z.object({
  group: z.array(z.number().int()),
  f: z.number(),
  utility_bits: z.number(),
  predicted_positive_prob: z.number(),
});

export const resultAckSchema = z.object({
  entropy_bits: z.number(),
  delta_threshold_bits: z.number(),
  stopped: z.boolean(),
});

export const historyEntrySchema = z.object({
  group: z.array(z.number().int()),
  outcome: z.union([z.literal(0), z.literal(1)]),
  override: z.boolean(),
});

export const sessionStateSchema = z.object({
  marginals: z.array(z.number()),
  entropy_bits: z.number(),
  delta_threshold_bits: z.number(),
  history: z.array(historyEntrySchema),
  status: z.union([z.literal("active"), z.literal("stopped")]),
});

export type Recommendation = z.infer<typeof recommendationSchema>;
export type ResultAck = z.infer<typeof resultAckSchema>;
export type HistoryEntry = z.infer<typeof historyEntrySchema>;
export type SessionState = z.infer<typeof sessionStateSchema>;

export interface ResultSubmission {
  group: number[];
  outcome: 0 | 1;
  override: boolean;
}
