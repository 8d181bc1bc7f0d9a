// Thin fetch client for the session protocol. GameClient only sees the
// GameApi interface, so tests substitute a scripted server.

import type {
  BlueprintResponse,
  CreateSessionResponse,
  IngestResult,
  StateResponse,
  WireEvent,
} from './types.js';

export interface GameApi {
  createSession(playerName: string, avatar: string, packId: string): Promise<CreateSessionResponse>;
  sendEvents(sessionId: string, events: WireEvent[]): Promise<IngestResult>;
  getState(sessionId: string): Promise<StateResponse>;
  getBlueprint(sessionId: string): Promise<BlueprintResponse | null>;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class HttpApi implements GameApi {
  constructor(private base: string = '') {}

  async createSession(playerName: string, avatar: string, packId: string): Promise<CreateSessionResponse> {
    const r = await fetch(`${this.base}/v1/sessions`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ player_name: playerName, avatar, pack_id: packId }),
    });
    if (r.status !== 201) throw new ApiError(r.status, await r.text());
    return (await r.json()) as CreateSessionResponse;
  }

  async sendEvents(sessionId: string, events: WireEvent[]): Promise<IngestResult> {
    const r = await fetch(`${this.base}/v1/sessions/${sessionId}/events`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ events }),
    });
    // 409 carries a regular IngestResult body (partial accept)
    if (r.status !== 200 && r.status !== 409) throw new ApiError(r.status, await r.text());
    return (await r.json()) as IngestResult;
  }

  async getState(sessionId: string): Promise<StateResponse> {
    const r = await fetch(`${this.base}/v1/sessions/${sessionId}/state`);
    if (r.status !== 200) throw new ApiError(r.status, await r.text());
    return (await r.json()) as StateResponse;
  }

  async getBlueprint(sessionId: string): Promise<BlueprintResponse | null> {
    const r = await fetch(`${this.base}/v1/sessions/${sessionId}/blueprint`);
    if (r.status === 409) return null; // not complete yet
    if (r.status !== 200) throw new ApiError(r.status, await r.text());
    return (await r.json()) as BlueprintResponse;
  }
}
