/**
 * Single source of truth for the explorer: one FilterSpec drives every
 * visible view. A state change issues at most one API request per visible
 * view; responses that no longer match the current filter are dropped
 * (last-write-wins keyed by the serialized query).
 */

import { ApiClient, FilterState, ViewName, emptyFilter, filterQuery } from "./api.js";

export type Renderer = (payload: unknown, view: ViewName) => void;

export interface ViewStateOptions {
  visible?: ViewName[];
  debounceMs?: number;
  binNs?: number | null;
  onError?: (view: ViewName, error: unknown) => void;
}

const ALL_VIEWS: ViewName[] = ["summary", "matrix", "pgraph", "dgraph", "timeline", "top"];

export class ViewState {
  filter: FilterState = emptyFilter();
  binNs: number | null;
  hover: string | null = null;
  readonly visible: ViewName[];
  requestCount = 0;

  private readonly debounceMs: number;
  private tokens = new Map<ViewName, string>();
  private timer: ReturnType<typeof setTimeout> | null = null;
  private waiters: (() => void)[] = [];
  private onError: (view: ViewName, error: unknown) => void;

  constructor(
    private readonly api: ApiClient,
    private readonly renderers: Partial<Record<ViewName, Renderer>>,
    options: ViewStateOptions = {},
  ) {
    this.visible = options.visible ?? [...ALL_VIEWS];
    this.debounceMs = options.debounceMs ?? 250;
    this.binNs = options.binNs ?? null;
    this.onError = options.onError ?? (() => undefined);
  }

  /** Fetch and render every visible view with the current filter. */
  async refresh(): Promise<void> {
    await Promise.all(
      this.visible.map(async (view) => {
        const token = this.queryFor(view);
        this.tokens.set(view, token);
        this.requestCount += 1;
        try {
          const env = await this.api.view<unknown>(
            view,
            this.filter,
            view === "timeline" ? this.binNs : undefined,
          );
          if (this.tokens.get(view) !== token) {
            return; // a newer filter superseded this request
          }
          this.renderers[view]?.(env.payload, view);
        } catch (error) {
          if (this.tokens.get(view) === token) {
            this.onError(view, error);
          }
        }
      }),
    );
  }

  /** Merge a filter edit; rapid edits coalesce into one refresh. */
  update(patch: Partial<FilterState>): Promise<void> {
    this.filter = { ...this.filter, ...patch };
    return this.schedule();
  }

  setTimeRange(tMin: number | null, tMax: number | null): Promise<void> {
    return this.update({ t_min: tMin, t_max: tMax });
  }

  setBinNs(binNs: number | null): Promise<void> {
    this.binNs = binNs;
    return this.schedule();
  }

  clearFilters(): Promise<void> {
    this.filter = { ...emptyFilter(), metric: this.filter.metric };
    return this.schedule();
  }

  queryFor(view: ViewName): string {
    return filterQuery(this.filter, view === "timeline" ? this.binNs : undefined);
  }

  private schedule(): Promise<void> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    return new Promise<void>((resolve) => {
      this.waiters.push(resolve);
      this.timer = setTimeout(() => {
        this.timer = null;
        const waiters = this.waiters;
        this.waiters = [];
        void this.refresh().then(() => waiters.forEach((w) => w()));
      }, this.debounceMs);
    });
  }
}
