/**
 * Typed client for the review API. The console displays server numbers
 * verbatim; nothing in here (or anywhere else in the app) recomputes
 * statistics locally.
 */

export const ASPECTS = [
  "GeneralDescription",
  "BrowserTabs",
  "FileIdentification",
  "SuspiciousElements",
] as const;

export type Aspect = (typeof ASPECTS)[number];
export type Score = 0 | 1 | 2 | 99;

export interface TabEntry {
  raw: string;
  logo: string | null;
  text: string | null;
  context: string | null;
}

export interface SuspiciousElement {
  raw: string;
  embedded_urls: string[];
  kind_hint: string | null;
}

export interface ParsedDescription {
  screenshot_id: string;
  main_content: string;
  installers: string[];
  explorer_files: string[];
  archive_members: string[];
  url_entries: string[];
  tabs: TabEntry[];
  suspicious: SuspiciousElement[];
  language: string;
  date_raw: string;
  date_parsed: string | null;
}

export type ItemStatus =
  | "Unscored"
  | "PartiallyScored"
  | "Disagreement"
  | "Resolved";

export interface Item {
  screenshot_id: string;
  image_url: string;
  parsed: ParsedDescription | null;
  applicability: Record<Aspect, boolean> | null;
  scores: Record<string, Partial<Record<Aspect, number>>>;
  consensus: Partial<Record<Aspect, number>>;
  status: ItemStatus;
}

export interface ItemPage {
  total: number;
  page: number;
  page_size: number;
  items: Item[];
}

export interface AggregateRow {
  score: number;
  count: number;
  pct: number;
}

export type AggregateTable = Record<string, AggregateRow[]>;

export interface AspectAgreement {
  aspect: string;
  n_double_coded: number;
  percent_agreement: number;
  cohen_kappa: number | null;
  kappa_degenerate: boolean;
}

export interface AgreementReport {
  per_aspect: AspectAgreement[];
  unresolved_ids: { screenshot_id: string; aspect: string; scores: number[] }[];
}

export interface SampleResponse {
  seed: number;
  base_n: number;
  min_per_aspect: number;
  ids: string[];
}

export interface ItemQuery {
  status?: ItemStatus;
  aspect?: Aspect;
  page?: number;
  page_size?: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: unknown,
  ) {
    super(`API error ${status}`);
  }
}

export class ReviewApi {
  constructor(
    private baseUrl: string = "",
    private coderId: string = "anonymous",
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const headers: Record<string, string> = { "X-Coder-Id": this.coderId };
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await resp.json();
    if (!resp.ok) throw new ApiError(resp.status, payload);
    return payload as T;
  }

  listItems(query: ItemQuery = {}): Promise<ItemPage> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(query)) {
      if (value !== undefined) params.set(key, String(value));
    }
    const qs = params.toString();
    return this.request<ItemPage>("GET", `/api/items${qs ? "?" + qs : ""}`);
  }

  getItem(id: string): Promise<Item> {
    return this.request<Item>("GET", `/api/items/${id}`);
  }

  imageUrl(id: string): string {
    return `${this.baseUrl}/api/items/${id}/image`;
  }

  submitScore(
    id: string,
    aspect: Aspect,
    score: Score,
    note = "",
  ): Promise<Item> {
    return this.request<Item>("POST", `/api/items/${id}/scores`, {
      aspect,
      score,
      note,
    });
  }

  submitConsensus(
    id: string,
    aspect: Aspect,
    score: Score,
    rationale = "",
  ): Promise<Item> {
    return this.request<Item>("POST", `/api/items/${id}/consensus`, {
      aspect,
      score,
      rationale,
    });
  }

  agreement(): Promise<AgreementReport> {
    return this.request<AgreementReport>("GET", "/api/agreement");
  }

  aggregate(): Promise<AggregateTable> {
    return this.request<AggregateTable>("GET", "/api/aggregate");
  }

  sample(
    seed: number,
    baseN: number,
    minPerAspect: number,
  ): Promise<SampleResponse> {
    const params = new URLSearchParams({
      seed: String(seed),
      base_n: String(baseN),
      min_per_aspect: String(minPerAspect),
    });
    return this.request<SampleResponse>("GET", `/api/sample?${params}`);
  }
}
