"""Durable event store: append-only log plus a relational projection.

The newline-delimited log is the source of truth; each line is
{"seq":N,"session":"...","recv_ts":N,"event":{...}} with a dense,
strictly increasing seq. The SQLite projection (tables sessions, actions,
movements) is derived state that replaying the log reconstructs exactly.
"""

from __future__ import annotations

import json
import os
import sqlite3
import threading
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Optional

from .errors import CorruptRecord, ParseError
from .session import (
    AnswerEvent,
    BoothReachedEvent,
    Event,
    MoveEvent,
    PromptShownEvent,
    SessionCreatedEvent,
)

LOG_FILENAME = "events.log"
PROJECTION_FILENAME = "projection.sqlite"


@dataclass(frozen=True)
class ActionRow:
    player_name: str
    question_answer: str
    question_number: str
    question_description: str
    timestamp: int  # epoch ms; rendered ISO 8601 at export boundaries
    session_id: str
    time_to_answer_ms: int


@dataclass(frozen=True)
class MovementRow:
    player_name: str
    x_axis: float
    y_axis: float
    z_axis: float
    euler_x: float
    euler_y: float
    euler_z: float
    quat_x: float
    quat_y: float
    quat_z: float
    quat_w: float
    timestamp: int  # epoch ms
    session_id: str


def encode_event(event: Event) -> dict:
    """Event to its wire/log object; field names are part of the protocol."""
    if isinstance(event, MoveEvent):
        px, py, pz = event.position
        ex, ey, ez = event.euler
        return {
            "type": "move",
            "position": {"x": px, "y": py, "z": pz},
            "euler": {"x": ex, "y": ey, "z": ez},
            "ts": event.ts,
        }
    if isinstance(event, AnswerEvent):
        return {"type": "answer", "question": event.question, "choice": event.choice, "ts": event.ts}
    if isinstance(event, BoothReachedEvent):
        return {"type": "booth", "ts": event.ts}
    if isinstance(event, PromptShownEvent):
        return {"type": "prompt", "question": event.question, "ts": event.ts}
    if isinstance(event, SessionCreatedEvent):
        sx, sy, sz = event.spawn
        return {
            "type": "session_created",
            "player_name": event.player_name,
            "avatar": event.avatar,
            "pack_id": event.pack_id,
            "map": event.map_name,
            "spawn": {"x": sx, "y": sy, "z": sz},
            "ts": event.ts,
        }
    raise TypeError(f"not an event: {event!r}")


def decode_event(obj: dict) -> Event:
    """Inverse of encode_event; raises ParseError on malformed objects."""
    try:
        kind = obj["type"]
        ts = obj["ts"]
        if not isinstance(ts, int) or isinstance(ts, bool):
            raise KeyError("ts")
        if kind == "move":
            pos = obj["position"]
            eul = obj["euler"]
            return MoveEvent(
                position=(float(pos["x"]), float(pos["y"]), float(pos["z"])),
                euler=(float(eul["x"]), float(eul["y"]), float(eul["z"])),
                ts=ts,
            )
        if kind == "answer":
            return AnswerEvent(question=str(obj["question"]), choice=str(obj["choice"]), ts=ts)
        if kind == "booth":
            return BoothReachedEvent(ts=ts)
        if kind == "prompt":
            return PromptShownEvent(question=str(obj["question"]), ts=ts)
        if kind == "session_created":
            spawn = obj["spawn"]
            return SessionCreatedEvent(
                player_name=str(obj["player_name"]),
                avatar=str(obj["avatar"]),
                pack_id=str(obj["pack_id"]),
                map_name=str(obj["map"]),
                spawn=(float(spawn["x"]), float(spawn["y"]), float(spawn["z"])),
                ts=ts,
            )
        raise ParseError(f"unknown event type {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed event object: {exc}") from None


@dataclass(frozen=True)
class LogRecord:
    seq: int
    session_id: str
    recv_ts: int
    event: Event

    def to_line(self) -> str:
        obj = {"seq": self.seq, "session": self.session_id, "recv_ts": self.recv_ts, "event": encode_event(self.event)}
        return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def read_log(path: Path) -> tuple[list[LogRecord], list[str]]:
    """Read every complete record; a torn final line is dropped with a warning.

    Raises CorruptRecord for malformed non-trailing lines or broken seq
    numbering. An absent or empty log is valid and yields no records.
    """
    if not path.exists():
        return [], []
    records: list[LogRecord] = []
    warnings: list[str] = []
    raw = path.read_text(encoding="utf-8")
    lines = raw.split("\n")
    trailing_open = lines[-1] != ""  # file did not end with a newline
    if not trailing_open:
        lines = lines[:-1]
    for i, line in enumerate(lines):
        is_last = i == len(lines) - 1
        try:
            obj = json.loads(line)
            record = LogRecord(
                seq=int(obj["seq"]),
                session_id=str(obj["session"]),
                recv_ts=int(obj["recv_ts"]),
                event=decode_event(obj["event"]),
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, ParseError) as exc:
            if is_last and trailing_open:
                warnings.append(f"dropped torn trailing line {i + 1}: {exc}")
                break
            raise CorruptRecord(f"log line {i + 1} is malformed: {exc}") from None
        expected = records[-1].seq + 1 if records else 1
        if record.seq != expected:
            raise CorruptRecord(f"log line {i + 1}: seq {record.seq}, expected {expected}")
        if records and record.recv_ts < records[-1].recv_ts:
            raise CorruptRecord(f"log line {i + 1}: recv_ts went backwards")
        records.append(record)
    return records, warnings


class EventLog:
    """Single-appender newline-delimited log; records are fsynced before ack."""

    def __init__(self, path: Path):
        self.path = Path(path)
        existing, warnings = read_log(self.path)
        self.warnings = warnings
        self._next_seq = existing[-1].seq + 1 if existing else 1
        self._last_recv = existing[-1].recv_ts if existing else 0
        if warnings:
            # drop the torn tail so new appends start on a clean line
            good = "".join(r.to_line() + "\n" for r in existing)
            self.path.write_text(good, encoding="utf-8")
        self._fh = open(self.path, "a", encoding="utf-8")

    def append_batch(self, entries: Iterable[tuple[str, int, Event]]) -> list[int]:
        """Append records atomically with one flush; returns assigned seqs.

        Counters only advance after the write and fsync succeed, so a failed
        append consumes no sequence numbers.
        """
        seqs = []
        out = []
        next_seq = self._next_seq
        last_recv = self._last_recv
        for session_id, recv_ts, event in entries:
            recv_ts = max(recv_ts, last_recv)  # recv_ts non-decreasing with seq
            last_recv = recv_ts
            rec = LogRecord(next_seq, session_id, recv_ts, event)
            out.append(rec.to_line() + "\n")
            seqs.append(next_seq)
            next_seq += 1
        self._fh.write("".join(out))
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self._next_seq = next_seq
        self._last_recv = last_recv
        return seqs

    def append(self, session_id: str, recv_ts: int, event: Event) -> int:
        return self.append_batch([(session_id, recv_ts, event)])[0]

    def close(self):
        if not self._fh.closed:
            self._fh.flush()
            os.fsync(self._fh.fileno())
            self._fh.close()


_SCHEMA = """
CREATE TABLE IF NOT EXISTS sessions(
    session_id TEXT PRIMARY KEY,
    player_name TEXT NOT NULL,
    avatar TEXT NOT NULL,
    pack_id TEXT NOT NULL,
    phase TEXT NOT NULL,
    created_ts INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS actions(
    player_name TEXT NOT NULL,
    question_answer TEXT NOT NULL,
    question_number TEXT NOT NULL,
    question_description TEXT NOT NULL,
    timestamp INTEGER NOT NULL,
    session_id TEXT NOT NULL,
    time_to_answer_ms INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS movements(
    player_name TEXT NOT NULL,
    x_axis REAL NOT NULL,
    y_axis REAL NOT NULL,
    z_axis REAL NOT NULL,
    euler_x REAL NOT NULL,
    euler_y REAL NOT NULL,
    euler_z REAL NOT NULL,
    quat_x REAL NOT NULL,
    quat_y REAL NOT NULL,
    quat_z REAL NOT NULL,
    quat_w REAL NOT NULL,
    timestamp INTEGER NOT NULL,
    session_id TEXT NOT NULL
);
"""

_ACTION_COLS = [f.name for f in fields(ActionRow)]
_MOVEMENT_COLS = [f.name for f in fields(MovementRow)]


class Projection:
    """Relational view over the log, queryable by session, question, time, space.

    Derived state: durability is relaxed (synchronous=OFF) because the log
    is the source of truth and a stale projection is rebuilt by replay.
    """

    def __init__(self, path: str):
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.execute("PRAGMA synchronous=OFF")
        self._conn.executescript(_SCHEMA)
        self._conn.commit()

    def apply_rows(self, rows: Iterable, phase: Optional[tuple[str, str]] = None):
        """Insert projection rows and the final phase update in one transaction."""
        for row in rows:
            if isinstance(row, ActionRow):
                self._insert_action(row)
            elif isinstance(row, MovementRow):
                self._insert_movement(row)
        if phase is not None:
            self._conn.execute("UPDATE sessions SET phase=? WHERE session_id=?", (phase[1], phase[0]))
        self._conn.commit()

    def upsert_session(self, session_id: str, player_name: str, avatar: str, pack_id: str, phase: str, created_ts: int):
        self._conn.execute(
            "INSERT INTO sessions(session_id, player_name, avatar, pack_id, phase, created_ts) "
            "VALUES(?,?,?,?,?,?) ON CONFLICT(session_id) DO UPDATE SET phase=excluded.phase",
            (session_id, player_name, avatar, pack_id, phase, created_ts),
        )
        self._conn.commit()

    def set_phase(self, session_id: str, phase: str):
        self._conn.execute("UPDATE sessions SET phase=? WHERE session_id=?", (phase, session_id))
        self._conn.commit()

    def _insert_action(self, row: ActionRow):
        self._conn.execute(
            f"INSERT INTO actions({','.join(_ACTION_COLS)}) VALUES({','.join('?' * len(_ACTION_COLS))})",
            tuple(getattr(row, c) for c in _ACTION_COLS),
        )

    def _insert_movement(self, row: MovementRow):
        self._conn.execute(
            f"INSERT INTO movements({','.join(_MOVEMENT_COLS)}) VALUES({','.join('?' * len(_MOVEMENT_COLS))})",
            tuple(getattr(row, c) for c in _MOVEMENT_COLS),
        )

    def query_actions(
        self,
        session_id: Optional[str] = None,
        question_number: Optional[str] = None,
        ts_from: Optional[int] = None,
        ts_to: Optional[int] = None,
    ) -> list[ActionRow]:
        """Rows matching every given predicate, in (timestamp, insertion) order."""
        clauses, params = [], []
        if session_id is not None:
            clauses.append("session_id=?")
            params.append(session_id)
        if question_number is not None:
            clauses.append("question_number=?")
            params.append(question_number)
        if ts_from is not None:
            clauses.append("timestamp>=?")
            params.append(ts_from)
        if ts_to is not None:
            clauses.append("timestamp<=?")
            params.append(ts_to)
        where = (" WHERE " + " AND ".join(clauses)) if clauses else ""
        sql = f"SELECT {','.join(_ACTION_COLS)} FROM actions{where} ORDER BY timestamp, rowid"
        return [ActionRow(*r) for r in self._conn.execute(sql, params)]

    def query_movements(
        self,
        session_id: Optional[str] = None,
        ts_from: Optional[int] = None,
        ts_to: Optional[int] = None,
        bbox: Optional[tuple[float, float, float, float]] = None,  # min_x, min_z, max_x, max_z
    ) -> list[MovementRow]:
        clauses, params = [], []
        if session_id is not None:
            clauses.append("session_id=?")
            params.append(session_id)
        if ts_from is not None:
            clauses.append("timestamp>=?")
            params.append(ts_from)
        if ts_to is not None:
            clauses.append("timestamp<=?")
            params.append(ts_to)
        if bbox is not None:
            clauses.append("x_axis>=? AND z_axis>=? AND x_axis<=? AND z_axis<=?")
            params.extend(bbox)
        where = (" WHERE " + " AND ".join(clauses)) if clauses else ""
        sql = f"SELECT {','.join(_MOVEMENT_COLS)} FROM movements{where} ORDER BY timestamp, rowid"
        return [MovementRow(*r) for r in self._conn.execute(sql, params)]

    def session_rows(self) -> list[tuple]:
        return sorted(self._conn.execute("SELECT session_id, player_name, avatar, pack_id, phase, created_ts FROM sessions"))

    def counts(self) -> tuple[int, int, int]:
        s = self._conn.execute("SELECT COUNT(*) FROM sessions").fetchone()[0]
        a = self._conn.execute("SELECT COUNT(*) FROM actions").fetchone()[0]
        m = self._conn.execute("SELECT COUNT(*) FROM movements").fetchone()[0]
        return s, a, m

    def close(self):
        self._conn.close()


class EventStore:
    """Log plus projection behind one lock; the single appender of the system.

    data_dir None keeps everything in memory (no log file), which replay
    uses to rebuild projections without touching disk. read_only opens the
    projection for queries without acquiring the log file.
    """

    def __init__(self, data_dir: Optional[Path] = None, *, read_only: bool = False):
        self._lock = threading.Lock()
        if data_dir is None:
            self.data_dir = None
            self.log = None
            self.projection = Projection(":memory:")
        else:
            self.data_dir = Path(data_dir)
            self.data_dir.mkdir(parents=True, exist_ok=True)
            self.log = None if read_only else EventLog(self.data_dir / LOG_FILENAME)
            self.projection = Projection(str(self.data_dir / PROJECTION_FILENAME))

    @property
    def warnings(self) -> list[str]:
        return self.log.warnings if self.log else []

    def append_batch(self, entries: list[tuple[str, int, Event]]) -> list[int]:
        with self._lock:
            if self.log is None:
                return [0] * len(entries)
            return self.log.append_batch(entries)

    def upsert_session(self, *args):
        with self._lock:
            self.projection.upsert_session(*args)

    def set_phase(self, session_id: str, phase: str):
        with self._lock:
            self.projection.set_phase(session_id, phase)

    def apply_rows(self, rows, phase: Optional[tuple[str, str]] = None):
        with self._lock:
            self.projection.apply_rows(rows, phase)

    def query_actions(self, **kwargs) -> list[ActionRow]:
        with self._lock:
            return self.projection.query_actions(**kwargs)

    def query_movements(self, **kwargs) -> list[MovementRow]:
        with self._lock:
            return self.projection.query_movements(**kwargs)

    def session_rows(self) -> list[tuple]:
        with self._lock:
            return self.projection.session_rows()

    def counts(self) -> tuple[int, int, int]:
        with self._lock:
            return self.projection.counts()

    def close(self):
        with self._lock:
            if self.log is not None:
                self.log.close()
            self.projection.close()
