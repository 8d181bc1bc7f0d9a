// Client game logic: phase mirror, 5 Hz movement sampling with local
// prediction, the outbound buffer, and server reconciliation. The server
// stays authoritative; on any disagreement the client adopts its state.

import type { GameApi } from './api.js';
import { EventBuffer } from './buffer.js';
import { boothCell, cellOf, headingOf, slideStep, walkable } from './movement.js';
import type {
  BlueprintResponse,
  MapDocument,
  MoveEventWire,
  PromptPayload,
  WireEvent,
} from './types.js';

export const SAMPLE_INTERVAL_MS = 200; // 5 Hz keyboard sampling

export type Phase = 'menu' | 'roaming' | 'prompted' | 'completed';

export interface KeyState {
  up: boolean;
  down: boolean;
  left: boolean;
  right: boolean;
}

export interface SessionStorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const STORAGE_KEY = 'epolis.session';

interface Snapshot {
  x: number;
  z: number;
  yaw: number;
}

export class GameClient {
  phase: Phase = 'menu';
  sessionId = '';
  map: MapDocument | null = null;
  pos = { x: 0, z: 0 };
  yaw = 0;
  speed = 4;
  answered = 0;
  total = 0;
  prompt: PromptPayload | null = null;
  blueprint: BlueprintResponse | null = null;
  banner: string | null = null;
  zoom = 1;
  volume = 0.5; // options menu slider; local only, nothing plays yet
  readonly buffer = new EventBuffer();

  private predictions: Snapshot[] = [];
  private committed: Snapshot = { x: 0, z: 0, yaw: 0 };
  private lastSampleAt = -Infinity;
  private boothSent = false;

  constructor(private api: GameApi, private storage: SessionStorageLike | null = null) {}

  // -- lifecycle ---------------------------------------------------------

  async start(playerName: string, avatar: string, packId: string): Promise<boolean> {
    try {
      const info = await this.api.createSession(playerName, avatar, packId);
      this.sessionId = info.session_id;
      this.map = info.map;
      this.total = info.dilemma_count;
      this.speed = info.speed;
      this.pos = { x: info.spawn.x, z: info.spawn.z };
      this.yaw = 0;
      this.answered = 0;
      this.committed = { x: this.pos.x, z: this.pos.z, yaw: 0 };
      this.phase = 'roaming';
      this.banner = null;
      this.storage?.setItem(
        STORAGE_KEY,
        JSON.stringify({ session_id: info.session_id, map: info.map, total: info.dilemma_count, speed: info.speed }),
      );
      return true;
    } catch (err) {
      this.banner = `cannot reach the server: ${String(err)}`;
      return false;
    }
  }

  /** Restore a session after a reload; phase, position and counter come from the server. */
  async resume(): Promise<boolean> {
    const raw = this.storage?.getItem(STORAGE_KEY);
    if (!raw) return false;
    try {
      const saved = JSON.parse(raw);
      this.sessionId = saved.session_id;
      this.map = saved.map;
      this.total = saved.total;
      this.speed = saved.speed ?? 4;
      await this.resync();
      return true;
    } catch (err) {
      this.banner = `cannot restore the session: ${String(err)}`;
      this.storage?.removeItem(STORAGE_KEY);
      return false;
    }
  }

  leaveToMenu(): void {
    this.storage?.removeItem(STORAGE_KEY);
    this.phase = 'menu';
  }

  // -- game loop ---------------------------------------------------------

  /** One loop iteration: sample keys at 5 Hz, predict, buffer, flush when due. */
  async tick(now: number, keys: KeyState): Promise<void> {
    if (this.phase !== 'roaming' || !this.map) {
      // movement is locked outside roaming; nothing is generated or buffered
      return;
    }
    if (now - this.lastSampleAt >= SAMPLE_INTERVAL_MS) {
      const [dx, dz] = directionOf(keys);
      if (dx !== 0 || dz !== 0) {
        this.lastSampleAt = now;
        const step = this.speed * (SAMPLE_INTERVAL_MS / 1000);
        const next = slideStep(this.map, this.pos, dx * step, dz * step);
        this.yaw = headingOf(next.x - this.pos.x, next.z - this.pos.z, this.yaw);
        this.pos = next;
        const ev: MoveEventWire = {
          type: 'move',
          position: { x: this.pos.x, y: 0, z: this.pos.z },
          euler: { x: 0, y: this.yaw, z: 0 },
          ts: now,
        };
        this.buffer.push(ev, now);
        this.predictions.push({ x: this.pos.x, z: this.pos.z, yaw: this.yaw });
      }
    }
    if (this.buffer.shouldFlush(now)) {
      await this.flush();
    }
    await this.maybeBooth(now);
  }

  async flush(): Promise<void> {
    if (this.buffer.size === 0) return;
    const events = this.buffer.drain();
    const predictions = this.predictions;
    this.predictions = [];
    let result;
    try {
      result = await this.api.sendEvents(this.sessionId, events);
    } catch (err) {
      this.banner = `lost connection: ${String(err)}`;
      return;
    }
    if (result.accepted > 0) {
      const last = predictions[Math.min(result.accepted, predictions.length) - 1];
      if (last) this.committed = last;
    }
    if (result.rejected_from !== null) {
      // partial accept: server position is the last accepted prediction
      this.pos = { x: this.committed.x, z: this.committed.z };
      this.yaw = this.committed.yaw;
    }
    if (result.opened_prompt) {
      this.enterPrompt(result.opened_prompt);
    }
    if (result.completed) {
      await this.completeToBlueprint();
      return;
    }
    if (result.error && result.error.code !== 'MOVE_WHILE_PROMPTED') {
      // anything else means the prediction diverged; adopt server state
      await this.resync();
    }
  }

  /** Answer the open dilemma; the modal calls this with the chosen key. */
  async answer(key: string, now: number): Promise<void> {
    if (this.phase !== 'prompted' || !this.prompt) return;
    const ev: WireEvent = { type: 'answer', question: this.prompt.question, choice: key, ts: now };
    const result = await this.api.sendEvents(this.sessionId, [ev]);
    if (result.error) {
      await this.resync();
      return;
    }
    this.answered += 1;
    this.prompt = null;
    this.buffer.locked = false;
    this.phase = 'roaming';
    if (result.completed) await this.completeToBlueprint();
  }

  private enterPrompt(payload: PromptPayload): void {
    this.prompt = payload;
    this.phase = 'prompted';
    this.buffer.locked = true;
  }

  private async maybeBooth(now: number): Promise<void> {
    if (
      this.phase !== 'roaming' ||
      this.boothSent ||
      this.total === 0 ||
      this.answered !== this.total ||
      !this.map
    ) {
      return;
    }
    const [ix, iz] = cellOf(this.map, this.pos.x, this.pos.z);
    const [bx, bz] = boothCell(this.map);
    if (ix !== bx || iz !== bz) return;
    await this.flush();
    if (this.phase !== 'roaming') return; // a straggler prompt opened
    this.boothSent = true;
    const result = await this.api.sendEvents(this.sessionId, [{ type: 'booth', ts: now }]);
    if (result.completed) {
      await this.completeToBlueprint();
    } else {
      this.boothSent = false;
      if (result.error && result.error.code !== 'BOOTH_REFUSED') await this.resync();
    }
  }

  private async completeToBlueprint(): Promise<void> {
    this.phase = 'completed';
    this.prompt = null;
    this.buffer.locked = false;
    this.blueprint = await this.api.getBlueprint(this.sessionId);
    if (this.blueprint === null) {
      // server says not complete after all; fall back to its view
      await this.resync();
    }
  }

  /** Adopt the server's authoritative view of this session. */
  async resync(): Promise<void> {
    const state = await this.api.getState(this.sessionId);
    this.buffer.drain();
    this.predictions = [];
    this.answered = state.progress.answered;
    this.total = state.progress.total;
    this.pos = { x: state.position.x, z: state.position.z };
    this.committed = { x: this.pos.x, z: this.pos.z, yaw: this.yaw };
    if (state.phase === 'prompted' && state.open_prompt) {
      this.enterPrompt(state.open_prompt);
    } else if (state.phase === 'completed') {
      await this.completeToBlueprint();
    } else {
      this.prompt = null;
      this.buffer.locked = false;
      this.phase = 'roaming';
    }
  }

  wheelZoom(deltaY: number): void {
    const factor = deltaY < 0 ? 1.15 : 1 / 1.15;
    this.zoom = Math.min(3, Math.max(0.5, this.zoom * factor));
  }

  /** True when the player stands on a walkable cell; debugging aid. */
  onStreet(): boolean {
    return this.map !== null && walkable(this.map, this.pos.x, this.pos.z);
  }
}

export function directionOf(keys: KeyState): [number, number] {
  let dx = 0;
  let dz = 0;
  if (keys.left) dx -= 1;
  if (keys.right) dx += 1;
  if (keys.up) dz -= 1;
  if (keys.down) dz += 1;
  if (dx !== 0 && dz !== 0) {
    const inv = 1 / Math.sqrt(2);
    dx *= inv;
    dz *= inv;
  }
  return [dx, dz];
}
