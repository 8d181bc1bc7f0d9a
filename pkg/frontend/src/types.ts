// Wire shapes of the session protocol.

export interface MapDocument {
  name: string;
  cell_size: number;
  rows: string[];
}

export interface Vec3 {
  x: number;
  y: number;
  z: number;
}

export interface CreateSessionResponse {
  session_id: string;
  map: MapDocument;
  dilemma_count: number;
  spawn: Vec3;
  speed: number;
}

export interface MoveEventWire {
  type: 'move';
  position: Vec3;
  euler: Vec3;
  ts: number;
}

export interface AnswerEventWire {
  type: 'answer';
  question: string;
  choice: string;
  ts: number;
}

export interface BoothEventWire {
  type: 'booth';
  ts: number;
}

export type WireEvent = MoveEventWire | AnswerEventWire | BoothEventWire;

export interface ChoiceOut {
  key: string;
  text: string;
}

export interface PromptPayload {
  question: string;
  prompt: string;
  choices: ChoiceOut[];
}

export interface IngestError {
  code: string;
  message: string;
}

export interface IngestResult {
  accepted: number;
  opened_prompt: PromptPayload | null;
  completed: boolean;
  rejected_from: number | null;
  error: IngestError | null;
}

export interface StateResponse {
  phase: 'roaming' | 'prompted' | 'completed';
  progress: { answered: number; total: number };
  position: Vec3;
  open_prompt: PromptPayload | null;
}

export interface AttributeScore {
  name: string;
  score: number;
  tier: 'Deteriorated' | 'Neutral' | 'Advanced';
}

export interface BlueprintResponse {
  attributes: AttributeScore[];
  answers: { question: string; choice: string }[];
  completed_ts: string;
}
