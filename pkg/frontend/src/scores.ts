/** Score sheets and their submission.
 *
 * A sheet collects the judge's choices for one interaction generation.
 * Values can only come from the scale the server handed us, partial sheets
 * are fine (unscored molecules keep their system fitness), and at most one
 * submission is in flight at any time.
 */

import { ApiError } from "./api.js";
import type { ScaleEntry } from "./types.js";

export class OffScaleValueError extends Error {
  constructor(value: number) {
    super(`score ${value} is not on the configured scale`);
    this.name = "OffScaleValueError";
  }
}

export interface ScoreSheet {
  generation: number;
  entries: Map<number, number>;
  submitted: boolean;
}

export function createSheet(generation: number): ScoreSheet {
  return { generation, entries: new Map(), submitted: false };
}

export function isOnScale(value: number, scale: ScaleEntry[]): boolean {
  return scale.some((entry) => entry.value === value);
}

export function setScore(
  sheet: ScoreSheet,
  chromosomeId: number,
  value: number,
  scale: ScaleEntry[],
): void {
  if (!isOnScale(value, scale)) throw new OffScaleValueError(value);
  sheet.entries.set(chromosomeId, value);
}

export function clearScore(sheet: ScoreSheet, chromosomeId: number): void {
  sheet.entries.delete(chromosomeId);
}

/** Wire shape for POSTing the sheet, ids ascending for stable requests. */
export function sheetBody(sheet: ScoreSheet): {
  scores: Array<{ chromosome_id: number; value: number }>;
} {
  const scores = [...sheet.entries.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([chromosome_id, value]) => ({ chromosome_id, value }));
  return { scores };
}

export type SubmitOutcome =
  | { kind: "accepted"; accepted: number }
  | { kind: "busy" }
  | { kind: "rejected"; status: number; error: string; detail: string }
  | { kind: "failed"; message: string };

export type PostScores = (
  generation: number,
  body: ReturnType<typeof sheetBody>,
) => Promise<{ accepted: number }>;

export class SubmissionGate {
  private inflight = false;

  get busy(): boolean {
    return this.inflight;
  }

  /**
   * Submit the sheet once. Returns `busy` if a previous submission is still
   * pending, `rejected` for a server refusal (retry is up to the caller),
   * `failed` for transport errors. Marks the sheet submitted on success.
   */
  async submit(post: PostScores, sheet: ScoreSheet): Promise<SubmitOutcome> {
    if (this.inflight) return { kind: "busy" };
    this.inflight = true;
    try {
      const ack = await post(sheet.generation, sheetBody(sheet));
      sheet.submitted = true;
      return { kind: "accepted", accepted: ack.accepted };
    } catch (err) {
      if (err instanceof ApiError) {
        return { kind: "rejected", status: err.status, error: err.errorName, detail: err.detail };
      }
      return { kind: "failed", message: err instanceof Error ? err.message : String(err) };
    } finally {
      this.inflight = false;
    }
  }
}
