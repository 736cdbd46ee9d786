/** Archive search queries. Every request the history browser sends is built
 * here, so it can only ever carry the parameters the engine understands. */

export const SEARCH_ORDERINGS = ["generation-asc", "fitness-desc", "weight-asc"] as const;

export type SearchOrdering = (typeof SEARCH_ORDERINGS)[number];

export interface ArchiveQueryParams {
  genMin?: number;
  genMax?: number;
  fitMin?: number;
  fitMax?: number;
  wtMin?: number;
  wtMax?: number;
  atomsMin?: number;
  atomsMax?: number;
  substr?: string;
  limit?: number;
  orderBy?: SearchOrdering;
}

export class InvalidQueryError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "InvalidQueryError";
  }
}

export function buildSearchParams(q: ArchiveQueryParams): URLSearchParams {
  const params = new URLSearchParams();
  const putInt = (key: string, v: number | undefined) => {
    if (v === undefined) return;
    if (!Number.isInteger(v)) throw new InvalidQueryError(`${key} must be an integer`);
    params.set(key, String(v));
  };
  const putNum = (key: string, v: number | undefined) => {
    if (v === undefined) return;
    if (!Number.isFinite(v)) throw new InvalidQueryError(`${key} must be a finite number`);
    params.set(key, String(v));
  };

  putInt("gen_min", q.genMin);
  putInt("gen_max", q.genMax);
  putNum("fit_min", q.fitMin);
  putNum("fit_max", q.fitMax);
  putNum("wt_min", q.wtMin);
  putNum("wt_max", q.wtMax);
  putInt("atoms_min", q.atomsMin);
  putInt("atoms_max", q.atomsMax);
  if (q.substr !== undefined && q.substr !== "") params.set("substr", q.substr);
  if (q.limit !== undefined) {
    if (!Number.isInteger(q.limit) || q.limit < 1) {
      throw new InvalidQueryError("limit must be an integer >= 1");
    }
    params.set("limit", String(q.limit));
  }
  if (q.orderBy !== undefined) {
    if (!SEARCH_ORDERINGS.includes(q.orderBy)) {
      throw new InvalidQueryError(`unknown ordering: ${q.orderBy}`);
    }
    params.set("order_by", q.orderBy);
  }
  return params;
}

const INT_FIELDS = {
  gen_min: "genMin",
  gen_max: "genMax",
  atoms_min: "atomsMin",
  atoms_max: "atomsMax",
  limit: "limit",
} as const;

const NUM_FIELDS = {
  fit_min: "fitMin",
  fit_max: "fitMax",
  wt_min: "wtMin",
  wt_max: "wtMax",
} as const;

/** Turn raw form strings (named like the wire parameters) into a typed query.
 * Blank fields are simply absent; malformed ones raise InvalidQueryError. */
export function queryFromForm(fields: Record<string, string>): ArchiveQueryParams {
  const q: ArchiveQueryParams = {};
  for (const [wire, prop] of Object.entries(INT_FIELDS)) {
    const raw = (fields[wire] ?? "").trim();
    if (raw === "") continue;
    const v = Number(raw);
    if (!Number.isInteger(v)) throw new InvalidQueryError(`${wire}: not an integer`);
    q[prop as (typeof INT_FIELDS)[keyof typeof INT_FIELDS]] = v;
  }
  for (const [wire, prop] of Object.entries(NUM_FIELDS)) {
    const raw = (fields[wire] ?? "").trim();
    if (raw === "") continue;
    const v = Number(raw);
    if (!Number.isFinite(v)) throw new InvalidQueryError(`${wire}: not a number`);
    q[prop as (typeof NUM_FIELDS)[keyof typeof NUM_FIELDS]] = v;
  }
  const substr = (fields["substr"] ?? "").trim();
  if (substr !== "") q.substr = substr;
  const orderBy = (fields["order_by"] ?? "").trim();
  if (orderBy !== "") {
    if (!(SEARCH_ORDERINGS as readonly string[]).includes(orderBy)) {
      throw new InvalidQueryError(`unknown ordering: ${orderBy}`);
    }
    q.orderBy = orderBy as SearchOrdering;
  }
  return q;
}
