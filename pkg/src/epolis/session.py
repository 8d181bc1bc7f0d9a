"""Authoritative per-session state machine.

Clients only claim moves, answers, and booth arrival; this module decides
what actually happened. A rejected event leaves the session bit-identical,
so the caller can hash state before and after to prove it.
"""

from __future__ import annotations

import hashlib
import json
import uuid
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .dilemmas import (
    AnswerRecord,
    CityState,
    DilemmaPack,
    apply_effects,
    open_prompt,
    record_answer,
)
from .errors import BadChoice, BadPlayerName, NotComplete
from .world import PLAYER_SPEED, CityMap, EulerAngles, PlayerState

# Anti-teleport bound: one accepted Move may displace at most speed * 0.5 s.
MAX_STEP = PLAYER_SPEED * 0.5
MAX_PLAYER_NAME = 64


class Phase(str, Enum):
    ROAMING = "roaming"
    PROMPTED = "prompted"
    COMPLETED = "completed"


class Reject(str, Enum):
    MOVE_WHILE_PROMPTED = "MOVE_WHILE_PROMPTED"
    WRONG_QUESTION = "WRONG_QUESTION"
    ANSWER_WITHOUT_PROMPT = "ANSWER_WITHOUT_PROMPT"
    DUPLICATE_ANSWER = "DUPLICATE_ANSWER"
    TS_ORDER = "TS_ORDER"
    ILLEGAL_MOVE = "ILLEGAL_MOVE"
    BOOTH_REFUSED = "BOOTH_REFUSED"
    SESSION_COMPLETE = "SESSION_COMPLETE"
    BAD_CHOICE = "BAD_CHOICE"


@dataclass(frozen=True)
class MoveEvent:
    position: tuple[float, float, float]
    euler: tuple[float, float, float]  # pitch_x, yaw_y, roll_z in degrees
    ts: int


@dataclass(frozen=True)
class AnswerEvent:
    question: str
    choice: str
    ts: int


@dataclass(frozen=True)
class BoothReachedEvent:
    ts: int


@dataclass(frozen=True)
class PromptShownEvent:
    question: str
    ts: int


@dataclass(frozen=True)
class SessionCreatedEvent:
    player_name: str
    avatar: str
    pack_id: str
    map_name: str
    spawn: tuple[float, float, float]
    ts: int


ClientEvent = Union[MoveEvent, AnswerEvent, BoothReachedEvent]
Event = Union[ClientEvent, PromptShownEvent, SessionCreatedEvent]


@dataclass(frozen=True)
class Outcome:
    accepted: bool
    error: Optional[Reject] = None
    message: str = ""
    opened_prompt: Optional[str] = None
    completed: bool = False


@dataclass(frozen=True)
class AttributeOutcome:
    name: str
    score: int
    tier: str


@dataclass(frozen=True)
class Blueprint:
    attributes: tuple[AttributeOutcome, ...]
    answers: tuple[tuple[str, str], ...]
    completed_ts: int


def tier_for(score: int) -> str:
    if score < 40:
        return "Deteriorated"
    if score <= 60:
        return "Neutral"
    return "Advanced"


class Session:
    """One player's authoritative state. Mutated only by handle_event."""

    def __init__(
        self,
        session_id: str,
        player_name: str,
        avatar: str,
        pack: DilemmaPack,
        cmap: CityMap,
        created_ts: int,
    ):
        self.session_id = session_id
        self.player_name = player_name
        self.avatar = avatar
        self.pack = pack
        self.cmap = cmap
        self.created_ts = created_ts
        self.phase = Phase.ROAMING
        self.prompt_question: Optional[str] = None
        self.prompt_ts: Optional[int] = None
        self.answered: list[AnswerRecord] = []
        self.city = CityState.initial(pack)
        spawn = cmap.spawn_cells[0]
        cx, cz = cmap.cell_center(*spawn)
        self.player = PlayerState((cx, 0.0, cz), EulerAngles(0.0, 0.0, 0.0), PLAYER_SPEED)
        # client timestamps are authoritative for ordering but client clocks
        # may lag the server's, so ordering starts at 0, not at created_ts
        self.last_event_ts = 0
        self.completed_ts: Optional[int] = None

    @property
    def answered_ids(self) -> set[str]:
        return {r.question_number for r in self.answered}

    def to_dict(self) -> dict:
        e = self.player.orientation
        return {
            "session_id": self.session_id,
            "player_name": self.player_name,
            "avatar": self.avatar,
            "pack_id": self.pack.pack_id,
            "map": self.cmap.name,
            "phase": self.phase.value,
            "prompt_question": self.prompt_question,
            "prompt_ts": self.prompt_ts,
            "answered": [
                {
                    "question_number": r.question_number,
                    "question_description": r.question_description,
                    "choice_key": r.choice_key,
                    "answer_ts": r.answer_ts,
                    "time_to_answer_ms": r.time_to_answer_ms,
                }
                for r in self.answered
            ],
            "deltas": dict(sorted(self.city.deltas.items())),
            "position": list(self.player.position),
            "euler": [e.pitch_x, e.yaw_y, e.roll_z],
            "created_ts": self.created_ts,
            "last_event_ts": self.last_event_ts,
            "completed_ts": self.completed_ts,
        }

    def state_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def create_session(
    player_name: str,
    avatar: str,
    pack: DilemmaPack,
    cmap: CityMap,
    *,
    now_ms: int,
    session_id: Optional[str] = None,
) -> Session:
    if not player_name or len(player_name) > MAX_PLAYER_NAME:
        raise BadPlayerName(f"player name must be 1..{MAX_PLAYER_NAME} characters")
    if session_id is None:
        session_id = str(uuid.uuid4())
    else:
        session_id = str(uuid.UUID(session_id))  # enforce RFC 4122 format
    return Session(session_id, player_name, avatar, pack, cmap, now_ms)


def handle_event(session: Session, event: ClientEvent) -> Outcome:
    """Apply one client event; reject without any state change on violation."""
    if isinstance(event, MoveEvent):
        return _on_move(session, event)
    if isinstance(event, AnswerEvent):
        return _on_answer(session, event)
    if isinstance(event, BoothReachedEvent):
        return _on_booth(session, event)
    raise TypeError(f"not a client event: {event!r}")


def _reject(code: Reject, message: str) -> Outcome:
    return Outcome(accepted=False, error=code, message=message)


def _on_move(session: Session, event: MoveEvent) -> Outcome:
    if session.phase is Phase.COMPLETED:
        return _reject(Reject.SESSION_COMPLETE, "session already completed")
    if event.ts < session.last_event_ts:
        return _reject(Reject.TS_ORDER, f"ts {event.ts} precedes {session.last_event_ts}")
    if session.phase is Phase.PROMPTED:
        return _reject(Reject.MOVE_WHILE_PROMPTED, f"answer {session.prompt_question} before moving")
    x, y, z = event.position
    if y != 0.0:
        return _reject(Reject.ILLEGAL_MOVE, "y must stay 0 on the ground plane")
    try:
        euler = EulerAngles(*event.euler)
    except ValueError as exc:
        return _reject(Reject.ILLEGAL_MOVE, f"bad orientation: {exc}")
    px, _, pz = session.player.position
    dx, dz = x - px, z - pz
    if dx * dx + dz * dz > MAX_STEP * MAX_STEP:
        return _reject(Reject.ILLEGAL_MOVE, f"displacement exceeds {MAX_STEP} world units")
    if not session.cmap.walkable(x, z):
        return _reject(Reject.ILLEGAL_MOVE, "destination is out of bounds or inside a building")

    session.player = PlayerState((x, y, z), euler, session.player.speed)
    session.last_event_ts = event.ts
    qid = open_prompt(session.pack, session.answered_ids, (x, z))
    if qid is not None:
        session.phase = Phase.PROMPTED
        session.prompt_question = qid
        session.prompt_ts = event.ts
    return Outcome(accepted=True, opened_prompt=qid)


def _on_answer(session: Session, event: AnswerEvent) -> Outcome:
    if session.phase is Phase.COMPLETED:
        return _reject(Reject.SESSION_COMPLETE, "session already completed")
    if event.ts < session.last_event_ts:
        return _reject(Reject.TS_ORDER, f"ts {event.ts} precedes {session.last_event_ts}")
    if session.phase is Phase.ROAMING:
        return _reject(Reject.ANSWER_WITHOUT_PROMPT, "no prompt is open")
    if event.question != session.prompt_question:
        return _reject(
            Reject.WRONG_QUESTION,
            f"open prompt is {session.prompt_question}, not {event.question}",
        )
    if event.question in session.answered_ids:
        return _reject(Reject.DUPLICATE_ANSWER, f"{event.question} already answered")
    spec = session.pack.get(event.question)
    try:
        record = record_answer(spec, event.choice, session.prompt_ts, event.ts)
    except BadChoice as exc:
        return _reject(Reject.BAD_CHOICE, str(exc))

    session.answered.append(record)
    session.city = apply_effects(session.city, spec, event.choice)
    session.phase = Phase.ROAMING
    session.prompt_question = None
    session.prompt_ts = None
    session.last_event_ts = event.ts
    return Outcome(accepted=True)


def _on_booth(session: Session, event: BoothReachedEvent) -> Outcome:
    if session.phase is Phase.COMPLETED:
        return _reject(Reject.SESSION_COMPLETE, "session already completed")
    if event.ts < session.last_event_ts:
        return _reject(Reject.TS_ORDER, f"ts {event.ts} precedes {session.last_event_ts}")
    if session.phase is Phase.PROMPTED:
        return _reject(Reject.BOOTH_REFUSED, "a prompt is open")
    answered, total = progress(session)
    if answered != total:
        return _reject(Reject.BOOTH_REFUSED, f"only {answered} of {total} dilemmas answered")
    x, _, z = session.player.position
    if session.cmap.cell_of(x, z) != session.cmap.booth_cell:
        return _reject(Reject.BOOTH_REFUSED, "player is not at the booth")

    session.phase = Phase.COMPLETED
    session.completed_ts = event.ts
    session.last_event_ts = event.ts
    return Outcome(accepted=True, completed=True)


def progress(session: Session) -> tuple[int, int]:
    return len(session.answered), session.pack.size


def blueprint(session: Session) -> Blueprint:
    """Final city summary; only available once the session completed."""
    if session.phase is not Phase.COMPLETED:
        raise NotComplete(f"session is {session.phase.value}")
    attrs = tuple(
        AttributeOutcome(name=a, score=session.city.score(a), tier=tier_for(session.city.score(a)))
        for a in session.pack.attributes
    )
    answers = tuple((r.question_number, r.choice_key) for r in session.answered)
    return Blueprint(attributes=attrs, answers=answers, completed_ts=session.completed_ts)
