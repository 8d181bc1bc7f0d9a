"""Pydantic request/response models for the HTTP protocol.

Field names here are the wire contract; the dilemma choices on the wire
never carry effects or any scoring data.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class Vec3(BaseModel):
    x: float
    y: float
    z: float


class CreateSessionRequest(BaseModel):
    player_name: str
    avatar: str
    pack_id: str


class MapDocument(BaseModel):
    name: str
    cell_size: float
    rows: list[str]


class CreateSessionResponse(BaseModel):
    session_id: str
    map: MapDocument
    dilemma_count: int
    spawn: Vec3
    speed: float


class WireEvent(BaseModel):
    """Client event envelope; the type tag decides which fields must be set."""

    type: Literal["move", "answer", "booth"]
    ts: int
    position: Optional[Vec3] = None
    euler: Optional[Vec3] = None
    question: Optional[str] = None
    choice: Optional[str] = None

    @model_validator(mode="after")
    def _check_fields(self):
        if self.type == "move" and (self.position is None or self.euler is None):
            raise ValueError("move events need position and euler")
        if self.type == "answer" and (self.question is None or self.choice is None):
            raise ValueError("answer events need question and choice")
        return self


class IngestRequest(BaseModel):
    events: list[WireEvent] = Field(min_length=1, max_length=256)


class ChoiceOut(BaseModel):
    key: str
    text: str


class PromptOut(BaseModel):
    question: str
    prompt: str
    choices: list[ChoiceOut]


class ErrorOut(BaseModel):
    code: str
    message: str


class IngestResponse(BaseModel):
    accepted: int
    opened_prompt: Optional[PromptOut] = None
    completed: bool
    rejected_from: Optional[int] = None
    error: Optional[ErrorOut] = None


class ProgressOut(BaseModel):
    answered: int
    total: int


class StateResponse(BaseModel):
    phase: str
    progress: ProgressOut
    position: Vec3
    open_prompt: Optional[PromptOut] = None


class AttributeScore(BaseModel):
    name: str
    score: int
    tier: str


class AnswerOut(BaseModel):
    question: str
    choice: str


class BlueprintResponse(BaseModel):
    attributes: list[AttributeScore]
    answers: list[AnswerOut]
    completed_ts: str  # ISO 8601 UTC milliseconds
