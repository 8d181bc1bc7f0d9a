"""Game service: session registry, durable ingestion, and log replay.

One logical writer per session: every batch for a session runs under that
session's lock, so events apply in arrival order while distinct sessions
proceed concurrently. Accepted events are fsynced to the log before the
caller sees the result.
"""

from __future__ import annotations

import time
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from .dilemmas import DilemmaPack
from .errors import CorruptRecord, UnknownPack, UnknownSession
from .session import (
    Blueprint,
    ClientEvent,
    MoveEvent,
    AnswerEvent,
    PromptShownEvent,
    Session,
    SessionCreatedEvent,
    blueprint,
    create_session,
    handle_event,
    progress,
)
from .store import ActionRow, EventStore, MovementRow, read_log
from .world import CityMap, EulerAngles, euler_to_quaternion, load_map
from . import dilemmas

MAP_COPY = "map.map"
PACK_COPY = "pack.pack"


def wall_clock_ms() -> int:
    return time.time_ns() // 1_000_000


@dataclass(frozen=True)
class PromptPayload:
    """What the client gets to render a dilemma; never carries effects."""

    question: str
    prompt: str
    choices: tuple[tuple[str, str], ...]  # (key, text)


@dataclass(frozen=True)
class IngestResult:
    accepted: int
    opened_prompt: Optional[PromptPayload]
    completed: bool
    rejected_from: Optional[int]
    error: Optional[tuple[str, str]]  # (code, message)


class GameService:
    """Wires the session engine to the store; the surface the API exposes.

    clock returns wall milliseconds for stamping recv_ts; passing None
    switches to virtual time (recv_ts = client ts), which simulations and
    replay use so runs reproduce byte for byte.
    """

    def __init__(
        self,
        cmap: CityMap,
        pack: DilemmaPack,
        store: EventStore,
        clock: Optional[Callable[[], int]] = wall_clock_ms,
    ):
        self.cmap = cmap
        self.pack = pack
        self.store = store
        self.clock = clock
        self.sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry = threading.Lock()

    def _stamp(self, event_ts: int) -> int:
        return event_ts if self.clock is None else self.clock()

    def create_session(
        self,
        player_name: str,
        avatar: str,
        pack_id: str,
        *,
        session_id: Optional[str] = None,
        now_ms: Optional[int] = None,
    ) -> Session:
        if pack_id != self.pack.pack_id:
            raise UnknownPack(f"no pack {pack_id!r} loaded")
        if now_ms is None:
            if self.clock is None:
                raise ValueError("virtual-time service needs an explicit now_ms")
            now_ms = self.clock()
        sess = create_session(
            player_name, avatar, self.pack, self.cmap, now_ms=now_ms, session_id=session_id
        )
        with self._registry:
            if sess.session_id in self.sessions:
                raise ValueError(f"session id {sess.session_id} already exists")
            self.sessions[sess.session_id] = sess
            self._locks[sess.session_id] = threading.Lock()
        created = SessionCreatedEvent(
            player_name=player_name,
            avatar=avatar,
            pack_id=pack_id,
            map_name=self.cmap.name,
            spawn=sess.player.position,
            ts=now_ms,
        )
        self.store.append_batch([(sess.session_id, self._stamp(now_ms), created)])
        self.store.upsert_session(
            sess.session_id, player_name, avatar, pack_id, sess.phase.value, now_ms
        )
        return sess

    def _session_and_lock(self, session_id: str) -> tuple[Session, threading.Lock]:
        with self._registry:
            sess = self.sessions.get(session_id)
            if sess is None:
                raise UnknownSession(session_id)
            return sess, self._locks[session_id]

    def ingest(self, session_id: str, events: list[ClientEvent]) -> IngestResult:
        """Apply a batch in order, stopping at the first rejection.

        Earlier events stay applied (partial accept). All accepted events of
        the batch are fsynced to the log in one write before the projection
        is touched and before the result is returned, so nothing is ever
        acknowledged that could not be replayed.
        """
        sess, lock = self._session_and_lock(session_id)
        with lock:
            entries: list[tuple[str, int, ClientEvent]] = []
            rows: list = []
            opened: Optional[PromptPayload] = None
            completed = False
            accepted = 0
            rejected_from: Optional[int] = None
            error: Optional[tuple[str, str]] = None
            for i, event in enumerate(events):
                out = handle_event(sess, event)
                if not out.accepted:
                    rejected_from = i
                    error = (out.error.value, out.message)
                    break
                entries.append((session_id, self._stamp(event.ts), event))
                if out.opened_prompt is not None:
                    entries.append(
                        (session_id, self._stamp(event.ts), PromptShownEvent(out.opened_prompt, event.ts))
                    )
                    opened = self.prompt_payload(out.opened_prompt)
                rows.append(self._projection_row(sess, event))
                if out.completed:
                    completed = True
                accepted += 1
            if entries:
                self.store.append_batch(entries)
                self.store.apply_rows(
                    [r for r in rows if r is not None], phase=(session_id, sess.phase.value)
                )
            return IngestResult(
                accepted=accepted,
                opened_prompt=opened,
                completed=completed,
                rejected_from=rejected_from,
                error=error,
            )

    def _projection_row(self, sess: Session, event: ClientEvent):
        """Row the accepted event projects to; built now, inserted after the log write."""
        if isinstance(event, MoveEvent):
            q = euler_to_quaternion(EulerAngles(*event.euler))
            return MovementRow(
                player_name=sess.player_name,
                x_axis=event.position[0],
                y_axis=event.position[1],
                z_axis=event.position[2],
                euler_x=event.euler[0],
                euler_y=event.euler[1],
                euler_z=event.euler[2],
                quat_x=q.x,
                quat_y=q.y,
                quat_z=q.z,
                quat_w=q.w,
                timestamp=event.ts,
                session_id=sess.session_id,
            )
        if isinstance(event, AnswerEvent):
            record = sess.answered[-1]
            return ActionRow(
                player_name=sess.player_name,
                question_answer=record.choice_key,
                question_number=record.question_number,
                question_description=record.question_description,
                timestamp=record.answer_ts,
                session_id=sess.session_id,
                time_to_answer_ms=record.time_to_answer_ms,
            )
        return None

    def prompt_payload(self, question: str) -> PromptPayload:
        spec = self.pack.get(question)
        return PromptPayload(
            question=spec.id,
            prompt=spec.prompt,
            choices=tuple((c.key, c.text) for c in spec.choices),
        )

    def state(self, session_id: str) -> dict:
        sess, lock = self._session_and_lock(session_id)
        with lock:
            answered, total = progress(sess)
            x, y, z = sess.player.position
            snapshot = {
                "phase": sess.phase.value,
                "progress": {"answered": answered, "total": total},
                "position": {"x": x, "y": y, "z": z},
                "open_prompt": None,
            }
            if sess.prompt_question is not None:
                snapshot["open_prompt"] = self.prompt_payload(sess.prompt_question)
            return snapshot

    def blueprint_of(self, session_id: str) -> Blueprint:
        sess, lock = self._session_and_lock(session_id)
        with lock:
            return blueprint(sess)

    def session_states(self) -> dict[str, dict]:
        with self._registry:
            items = list(self.sessions.items())
        return {sid: sess.to_dict() for sid, sess in sorted(items)}


@dataclass
class ReplayResult:
    service: GameService
    records: int
    warnings: list[str]


def replay_log(
    log_path: Path,
    cmap: CityMap,
    pack: DilemmaPack,
    store: Optional[EventStore] = None,
) -> ReplayResult:
    """Rebuild all state by re-running the engine over the log in seq order.

    Server-emitted prompt records are audit entries; replay checks each one
    against what the engine regenerates and raises CorruptRecord on any
    disagreement, as for a logged client event the engine rejects.
    """
    records, warnings = read_log(Path(log_path))
    store = store if store is not None else EventStore(None)
    svc = GameService(cmap, pack, store, clock=None)
    expected_prompt: dict[str, PromptShownEvent] = {}
    for rec in records:
        ev = rec.event
        if isinstance(ev, SessionCreatedEvent):
            if ev.pack_id != pack.pack_id:
                raise CorruptRecord(f"seq {rec.seq}: unknown pack {ev.pack_id!r}")
            sess = svc.create_session(
                ev.player_name, ev.avatar, ev.pack_id, session_id=rec.session_id, now_ms=ev.ts
            )
            if sess.player.position != ev.spawn:
                raise CorruptRecord(f"seq {rec.seq}: spawn {ev.spawn} does not match map spawn")
        elif isinstance(ev, PromptShownEvent):
            exp = expected_prompt.pop(rec.session_id, None)
            if exp is None or exp.question != ev.question or exp.ts != ev.ts:
                raise CorruptRecord(f"seq {rec.seq}: prompt record disagrees with engine state")
        else:
            result = svc.ingest(rec.session_id, [ev])
            if result.error is not None:
                raise CorruptRecord(f"seq {rec.seq}: logged event rejected on replay ({result.error[0]})")
            if result.opened_prompt is not None:
                expected_prompt[rec.session_id] = PromptShownEvent(result.opened_prompt.question, ev.ts)
    for sid, exp in sorted(expected_prompt.items()):
        warnings.append(f"log ends before the prompt record for session {sid} ({exp.question})")
    return ReplayResult(service=svc, records=len(records), warnings=warnings)


def compare_projections(a: EventStore, b: EventStore) -> list[str]:
    """Differences between two projections as human-readable lines; [] if equal."""
    diffs = []
    if Counter(a.query_actions()) != Counter(b.query_actions()):
        diffs.append("actions tables differ")
    if Counter(a.query_movements()) != Counter(b.query_movements()):
        diffs.append("movements tables differ")
    if a.session_rows() != b.session_rows():
        diffs.append("sessions tables differ")
    return diffs


def init_data_dir(data_dir: Path, map_text: str, pack_text: str) -> None:
    """Place content copies in the data directory so it is self-describing.

    Refuses to mix content: an existing copy must be byte-identical to the
    one being supplied, otherwise replay of old events would be meaningless.
    """
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    for name, text in ((MAP_COPY, map_text), (PACK_COPY, pack_text)):
        target = data_dir / name
        if target.exists():
            if target.read_text(encoding="utf-8") != text:
                raise ValueError(f"{target} already holds different content")
        else:
            target.write_text(text, encoding="utf-8")


def load_data_dir(data_dir: Path) -> tuple[CityMap, DilemmaPack]:
    """Load the map and pack copies a data directory was initialized with."""
    data_dir = Path(data_dir)
    map_path = data_dir / MAP_COPY
    pack_path = data_dir / PACK_COPY
    if not map_path.exists() or not pack_path.exists():
        raise FileNotFoundError(f"{data_dir} has no content copies; was it produced by serve/simulate?")
    cmap = load_map(map_path.read_text(encoding="utf-8"))
    pack = dilemmas.load_pack(pack_path.read_text(encoding="utf-8"), cmap)
    return cmap, pack
