// Outbound event buffer. Flushes when it holds 64 events or the oldest
// one is a second old, whichever comes first. While locked (a prompt is
// open) buffering a move is a programming error, not a soft no-op: the
// client must never generate one.

import type { WireEvent } from './types.js';

export const FLUSH_MAX_EVENTS = 64;
export const FLUSH_MAX_AGE_MS = 1000;

export class EventBuffer {
  private events: WireEvent[] = [];
  private firstBufferedAt: number | null = null;
  locked = false;

  get size(): number {
    return this.events.length;
  }

  push(event: WireEvent, now: number): void {
    if (this.locked && event.type === 'move') {
      throw new Error('move buffered while a prompt is open');
    }
    if (this.firstBufferedAt === null) this.firstBufferedAt = now;
    this.events.push(event);
  }

  shouldFlush(now: number): boolean {
    if (this.events.length === 0) return false;
    if (this.events.length >= FLUSH_MAX_EVENTS) return true;
    return this.firstBufferedAt !== null && now - this.firstBufferedAt >= FLUSH_MAX_AGE_MS;
  }

  drain(): WireEvent[] {
    const out = this.events;
    this.events = [];
    this.firstBufferedAt = null;
    return out;
  }
}
