/**
 * View model and interaction dispatch.
 *
 * The view renders exclusively from the last scene document received; every
 * auditor interaction issues exactly one session endpoint call. Commands are
 * serialized: at most one request is in flight and later clicks queue behind
 * it. Playback is client-owned: while the session reports playing, a timer
 * issues next at the configured interval until pause, stop or exhaustion.
 */

import { ApiCallError, ServiceClient, SessionSummary } from "./client.js";
import { renderScene } from "./render.js";
import { parseScene, SceneDoc, SceneParseError } from "./scene.js";

export interface Scheduler {
  set(fn: () => void, ms: number): unknown;
  clear(handle: unknown): void;
}

const defaultScheduler: Scheduler = {
  set: (fn, ms) => setTimeout(fn, ms),
  clear: (handle) => clearTimeout(handle as ReturnType<typeof setTimeout>),
};

export const DEFAULT_FRAME_MS = 3000;

export interface ViewState {
  session: SessionSummary | null;
  scene: SceneDoc | null;
  svg: string | null;
  threshold: number;
  playbackMs: number;
  selection: string | null;
  banner: string | null;
  toast: string | null;
  notice: string | null;
}

export interface ControllerOptions {
  playbackMs?: number;
  scheduler?: Scheduler;
  onChange?: (state: ViewState) => void;
}

export class Controller {
  readonly state: ViewState;

  private readonly scheduler: Scheduler;
  private readonly onChange: ((state: ViewState) => void) | undefined;
  private chain: Promise<void> = Promise.resolve();
  private timer: unknown = null;

  constructor(
    private readonly client: ServiceClient,
    options: ControllerOptions = {},
  ) {
    this.scheduler = options.scheduler ?? defaultScheduler;
    this.onChange = options.onChange;
    this.state = {
      session: null,
      scene: null,
      svg: null,
      threshold: 0.5,
      playbackMs: options.playbackMs ?? DEFAULT_FRAME_MS,
      selection: null,
      banner: null,
      toast: null,
      notice: null,
    };
  }

  // -- interactions (each issues exactly one endpoint call) ----------------

  createSession(threshold: number, additionCap?: number): Promise<ViewState> {
    return this.command(async () => {
      const summary = await this.client.createSession(threshold, additionCap);
      this.state.threshold = summary.threshold;
      this.state.scene = null;
      this.state.svg = null;
      this.state.selection = null;
      this.applySummary(summary);
    });
  }

  start(): Promise<ViewState> {
    return this.command(async () => this.applySummary(await this.client.start(this.sid())));
  }

  pause(): Promise<ViewState> {
    return this.command(async () => this.applySummary(await this.client.pause(this.sid())));
  }

  resume(): Promise<ViewState> {
    return this.command(async () => this.applySummary(await this.client.resume(this.sid())));
  }

  stop(): Promise<ViewState> {
    return this.command(async () => this.applySummary(await this.client.stop(this.sid())));
  }

  next(): Promise<ViewState> {
    return this.command(async () => {
      const summary = await this.client.next(this.sid());
      this.applySummary(summary);
      if (summary.exhausted) this.state.notice = "animation complete";
    });
  }

  /** Click an employee or client sector; selection expands related entities. */
  clickNode(id: string): Promise<ViewState> {
    return this.command(async () => {
      this.applySummary(await this.client.select(this.sid(), id));
      this.state.selection = id;
    });
  }

  /** Click a cluster wedge; the engine marks its members on the heat-map. */
  clickCluster(id: string): Promise<ViewState> {
    return this.clickNode(id);
  }

  toggleMode(): Promise<ViewState> {
    return this.command(async () => {
      const mode = this.state.session?.mode === "overview" ? "detail" : "overview";
      this.applySummary(await this.client.setMode(this.sid(), mode));
    });
  }

  setThreshold(threshold: number): Promise<ViewState> {
    return this.command(async () => {
      const summary = await this.client.setThreshold(this.sid(), threshold);
      this.state.threshold = summary.threshold;
      this.applySummary(summary);
    });
  }

  /** Playback speed is client-side only; no endpoint involved. */
  setPlaybackMs(ms: number): ViewState {
    this.state.playbackMs = ms;
    this.syncTimer();
    this.emit();
    return this.state;
  }

  // -- machinery ------------------------------------------------------------

  private sid(): string {
    if (!this.state.session) throw new ApiCallError("conflict", "no session open", 409);
    return this.state.session.session_id;
  }

  /** Serialize commands: one in flight, later interactions queue. */
  private command(task: () => Promise<void>): Promise<ViewState> {
    const run = this.chain.then(async () => {
      this.state.toast = null;
      this.state.notice = null;
      try {
        await task();
      } catch (err) {
        if (err instanceof ApiCallError) {
          this.state.toast = `${err.code}: ${err.message}`;
        } else if (err instanceof SceneParseError) {
          this.state.banner = err.message;
        } else {
          this.state.toast = `network error: ${String(err)}`;
        }
      }
      this.syncTimer();
      this.emit();
      return this.state;
    });
    this.chain = run.then(
      () => undefined,
      () => undefined,
    );
    return run;
  }

  /** Merge a summary; a scene payload replaces the frame only if it parses. */
  private applySummary(summary: SessionSummary): void {
    if (summary.scene !== undefined && summary.scene !== null) {
      const scene = parseScene(summary.scene);
      this.state.scene = scene;
      this.state.svg = renderScene(scene);
      this.state.banner = null;
    }
    this.state.session = summary;
  }

  private syncTimer(): void {
    const playing = this.state.session?.status === "playing";
    if (this.timer !== null) {
      this.scheduler.clear(this.timer);
      this.timer = null;
    }
    if (playing) {
      this.timer = this.scheduler.set(() => {
        this.timer = null;
        if (this.state.session?.status === "playing") void this.next();
      }, this.state.playbackMs);
    }
  }

  private emit(): void {
    this.onChange?.(this.state);
  }
}
