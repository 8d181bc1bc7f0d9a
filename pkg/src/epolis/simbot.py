"""Deterministic synthetic players for tests and load generation.

A bot owns a virtual clock and a portable splitmix64 generator, so a given
(policy, seed, map, pack) always produces a byte-identical event stream.
Bots speak the ingestion protocol's wire shapes whether they target an
in-process service or a live server over HTTP.
"""

from __future__ import annotations

import math
import time
import uuid
from collections import deque
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence, Union

from .dilemmas import DilemmaPack
from .errors import EpolisError
from .session import AnswerEvent, BoothReachedEvent, MoveEvent
from .service import GameService, IngestResult
from .store import decode_event, encode_event
from .world import PLAYER_SPEED, CityMap

SIM_EPOCH_MS = 1704067200000  # 2024-01-01T00:00:00Z; virtual clocks start here
DEFAULT_SAMPLE_INTERVAL_MS = 200
DEFAULT_BATCH_SIZE = 16
MAX_EVENTS = 50000


class SplitMix64:
    """splitmix64: 64-bit state with the published increment and mix constants."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def randint(self, n: int) -> int:
        """Uniform in [0, n) by rejection sampling, so results stay unbiased."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def choice(self, seq: Sequence):
        return seq[self.randint(len(seq))]


@dataclass(frozen=True)
class BotPolicy:
    movement: str = "shortest_path"  # or "random_walk"
    answers: Union[str, tuple[str, ...]] = "uniform"  # "uniform" or scripted keys
    sample_interval_ms: int = DEFAULT_SAMPLE_INTERVAL_MS
    batch_size: int = DEFAULT_BATCH_SIZE


@dataclass(frozen=True)
class BotSummary:
    session_id: str
    events_sent: int
    answers: int
    completed: bool
    blueprint: Optional[dict] = None


@dataclass(frozen=True)
class PopulationReport:
    sessions: int
    completed: int
    total_actions: int
    total_movements: int
    wall_time_s: float


class BotError(EpolisError):
    """A bot got a server response it cannot recover from."""


class SessionClient(Protocol):
    """Transport abstraction over the session protocol's wire shapes."""

    def create_session(self, player_name: str, avatar: str, pack_id: str,
                       session_id: Optional[str] = None, now_ms: Optional[int] = None) -> dict: ...

    def send_events(self, session_id: str, events: list[dict]) -> dict: ...

    def get_blueprint(self, session_id: str) -> dict: ...


class InProcessClient:
    """Drives a GameService directly, using the same wire dictionaries as HTTP."""

    def __init__(self, service: GameService):
        self.service = service

    def create_session(self, player_name, avatar, pack_id, session_id=None, now_ms=None) -> dict:
        sess = self.service.create_session(
            player_name, avatar, pack_id, session_id=session_id, now_ms=now_ms
        )
        x, y, z = sess.player.position
        return {
            "session_id": sess.session_id,
            "map": self.service.cmap.to_document(),
            "dilemma_count": self.service.pack.size,
            "spawn": {"x": x, "y": y, "z": z},
            "speed": PLAYER_SPEED,
        }

    def send_events(self, session_id, events) -> dict:
        decoded = [decode_event(e) for e in events]
        return ingest_result_dict(self.service.ingest(session_id, decoded))

    def get_blueprint(self, session_id) -> dict:
        bp = self.service.blueprint_of(session_id)
        return {
            "attributes": [{"name": a.name, "score": a.score, "tier": a.tier} for a in bp.attributes],
            "answers": [{"question": q, "choice": c} for q, c in bp.answers],
            "completed_ts": bp.completed_ts,
        }


class HttpClient:
    """Same protocol against a live server."""

    def __init__(self, base_url: str, http=None):
        import httpx

        self.http = http or httpx.Client(base_url=base_url, timeout=30.0)

    def create_session(self, player_name, avatar, pack_id, session_id=None, now_ms=None) -> dict:
        # the server stamps ids and times; deterministic overrides are in-process only
        r = self.http.post(
            "/v1/sessions",
            json={"player_name": player_name, "avatar": avatar, "pack_id": pack_id},
        )
        r.raise_for_status()
        return r.json()

    def send_events(self, session_id, events) -> dict:
        r = self.http.post(f"/v1/sessions/{session_id}/events", json={"events": events})
        if r.status_code not in (200, 409):
            raise BotError(f"ingest returned {r.status_code}: {r.text}")
        return r.json()

    def get_blueprint(self, session_id) -> dict:
        r = self.http.get(f"/v1/sessions/{session_id}/blueprint")
        r.raise_for_status()
        return r.json()


def ingest_result_dict(result: IngestResult) -> dict:
    opened = None
    if result.opened_prompt is not None:
        opened = {
            "question": result.opened_prompt.question,
            "prompt": result.opened_prompt.prompt,
            "choices": [{"key": k, "text": t} for k, t in result.opened_prompt.choices],
        }
    return {
        "accepted": result.accepted,
        "opened_prompt": opened,
        "completed": result.completed,
        "rejected_from": result.rejected_from,
        "error": None if result.error is None else {"code": result.error[0], "message": result.error[1]},
    }


def _bfs_path(cmap: CityMap, start: tuple[int, int], goal: tuple[int, int]) -> list[tuple[int, int]]:
    """Shortest 4-connected path over non-building cells, including both ends."""
    if start == goal:
        return [start]
    prev: dict[tuple[int, int], tuple[int, int]] = {start: start}
    queue = deque([start])
    w, h = cmap.width_cells, cmap.height_cells
    while queue:
        ix, iz = queue.popleft()
        for nxt in ((ix + 1, iz), (ix - 1, iz), (ix, iz + 1), (ix, iz - 1)):
            nx, nz = nxt
            if 0 <= nx < w and 0 <= nz < h and nxt not in prev and cmap.rows[nz][nx] != "#":
                prev[nxt] = (ix, iz)
                if nxt == goal:
                    path = [nxt]
                    while path[-1] != start:
                        path.append(prev[path[-1]])
                    path.reverse()
                    return path
                queue.append(nxt)
    raise BotError(f"no path from {start} to {goal}")


class Bot:
    """One synthetic player driving one session to completion."""

    def __init__(
        self,
        policy: BotPolicy,
        seed: int,
        cmap: CityMap,
        pack: DilemmaPack,
        client: SessionClient,
        player_name: str,
        avatar: str = "avatar1",
        start_ms: int = SIM_EPOCH_MS,
        deterministic_ids: bool = True,
    ):
        self.policy = policy
        self.rng = SplitMix64(seed)
        self.cmap = cmap
        self.pack = pack
        self.client = client
        self.player_name = player_name
        self.avatar = avatar
        self.deterministic_ids = deterministic_ids
        self.session_id = ""
        self.x = 0.0
        self.z = 0.0
        self.yaw = 0.0
        self.clock = start_ms
        self.answered_ids: set[str] = set()
        self.events_sent = 0
        # buffered wire events plus the (x, z, yaw, clock) state before each
        self._buffer: list[dict] = []
        self._pre_states: list[tuple[float, float, float, int]] = []

    # -- lifecycle ---------------------------------------------------------

    def run(self) -> BotSummary:
        session_id = None
        now_ms = None
        if self.deterministic_ids:
            bits = (self.rng.next_u64() << 64) | self.rng.next_u64()
            session_id = str(uuid.UUID(int=bits, version=4))
            now_ms = self.clock
        info = self.client.create_session(
            self.player_name, self.avatar, self.pack.pack_id, session_id=session_id, now_ms=now_ms
        )
        self.session_id = info["session_id"]
        self.x = info["spawn"]["x"]
        self.z = info["spawn"]["z"]

        total = self.pack.size
        while len(self.answered_ids) < total:
            if self.events_sent > MAX_EVENTS:
                raise BotError("event budget exhausted before completing")
            self._walk_to(self._next_target())

        self._walk_to(self.cmap.cell_center(*self.cmap.booth_cell))
        result = self._send([encode_event(BoothReachedEvent(ts=self.clock))])
        if result["error"] is not None:
            raise BotError(f"booth refused: {result['error']}")
        self.clock += self.policy.sample_interval_ms

        blueprint = self.client.get_blueprint(self.session_id) if result["completed"] else None
        return BotSummary(
            session_id=self.session_id,
            events_sent=self.events_sent,
            answers=len(self.answered_ids),
            completed=result["completed"],
            blueprint=blueprint,
        )

    # -- planning ------------------------------------------------------------

    def _next_target(self) -> tuple[float, float]:
        specs = sorted(
            (d for d in self.pack.dilemmas if d.id not in self.answered_ids),
            key=lambda d: d.numeric_id,
        )
        if self.policy.movement == "random_walk":
            spec = specs[self.rng.randint(len(specs))]
        else:
            spec = specs[0]
        return (spec.trigger.x, spec.trigger.z)

    # -- movement --------------------------------------------------------

    def _walk_to(self, target_xz: tuple[float, float]) -> None:
        """Walk toward the target; stop early when a prompt interrupts."""
        before = len(self.answered_ids)
        if self.policy.movement == "random_walk":
            self._random_detour()
            if len(self.answered_ids) != before:
                return
        path = _bfs_path(self.cmap, self.cmap.cell_of(self.x, self.z), self.cmap.cell_of(*target_xz))
        waypoints = [self.cmap.cell_center(ix, iz) for ix, iz in path[1:]]
        waypoints.append(target_xz)
        for wx, wz in waypoints:
            self._step_until(wx, wz)
            if len(self.answered_ids) != before:
                return
        self._flush()

    def _random_detour(self) -> None:
        for _ in range(self.rng.randint(3)):
            ix, iz = self.cmap.cell_of(self.x, self.z)
            options = [
                (nx, nz)
                for nx, nz in ((ix + 1, iz), (ix - 1, iz), (ix, iz + 1), (ix, iz - 1))
                if 0 <= nx < self.cmap.width_cells
                and 0 <= nz < self.cmap.height_cells
                and self.cmap.rows[nz][nx] != "#"
            ]
            if not options:
                return
            wx, wz = self.cmap.cell_center(*self.rng.choice(options))
            before = len(self.answered_ids)
            self._step_until(wx, wz)
            if len(self.answered_ids) != before:
                return

    def _step_until(self, wx: float, wz: float) -> None:
        step_len = PLAYER_SPEED * self.policy.sample_interval_ms / 1000.0
        while True:
            dx = wx - self.x
            dz = wz - self.z
            dist = math.hypot(dx, dz)
            if dist < 1e-9:
                return
            step = min(step_len, dist)
            yaw = math.degrees(math.atan2(dx, dz)) % 360.0
            yaw = 0.0 if yaw >= 360.0 else yaw
            self._emit_move(self.x + dx / dist * step, self.z + dz / dist * step, yaw)
            if len(self._buffer) >= self.policy.batch_size and self._flush():
                return

    def _emit_move(self, x: float, z: float, yaw: float) -> None:
        self._pre_states.append((self.x, self.z, self.yaw, self.clock))
        ev = MoveEvent(position=(x, 0.0, z), euler=(0.0, yaw, 0.0), ts=self.clock)
        self._buffer.append(encode_event(ev))
        self.x, self.z, self.yaw = x, z, yaw
        self.clock += self.policy.sample_interval_ms

    # -- transport -------------------------------------------------------

    def _flush(self) -> bool:
        """Send buffered moves; True when a prompt interrupted the batch."""
        if not self._buffer:
            return False
        batch = self._buffer
        pre_states = self._pre_states
        end_state = (self.x, self.z, self.yaw, self.clock)
        self._buffer = []
        self._pre_states = []
        result = self._send(batch)
        if result["error"] is not None and result["error"]["code"] != "MOVE_WHILE_PROMPTED":
            raise BotError(f"server rejected move: {result['error']}")
        accepted = result["accepted"]
        if accepted < len(batch):
            # resynchronize to the server: state before the first rejected move
            self.x, self.z, self.yaw, self.clock = (
                pre_states[accepted] if accepted < len(pre_states) else end_state
            )
        if result["opened_prompt"] is not None:
            self._answer(result["opened_prompt"])
            return True
        return False

    def _send(self, events: list[dict]) -> dict:
        result = self.client.send_events(self.session_id, events)
        self.events_sent += result["accepted"]
        return result

    def _answer(self, prompt: dict) -> None:
        # the prompting move is the last accepted one; its ts is clock - interval
        prompt_ts = self.clock - self.policy.sample_interval_ms
        ts = prompt_ts + self._think_ms()
        ev = AnswerEvent(question=prompt["question"], choice=self._choose(prompt), ts=ts)
        result = self._send([encode_event(ev)])
        if result["error"] is not None:
            raise BotError(f"answer rejected: {result['error']}")
        self.answered_ids.add(prompt["question"])
        self.clock = ts + self.policy.sample_interval_ms

    def _think_ms(self) -> int:
        if isinstance(self.policy.answers, tuple):
            return 1000
        return 500 + self.rng.randint(2500)

    def _choose(self, prompt: dict) -> str:
        keys = [c["key"] for c in prompt["choices"]]
        if isinstance(self.policy.answers, tuple):
            idx = len(self.answered_ids)
            if idx >= len(self.policy.answers):
                raise BotError("scripted answer list exhausted")
            key = self.policy.answers[idx]
            if key not in keys:
                raise BotError(f"scripted key {key!r} not offered for {prompt['question']}")
            return key
        return self.rng.choice(keys)


def run_bot(
    policy: BotPolicy,
    seed: int,
    cmap: CityMap,
    pack: DilemmaPack,
    client: SessionClient,
    player_name: str,
    avatar: str = "avatar1",
    start_ms: int = SIM_EPOCH_MS,
    deterministic_ids: bool = True,
) -> BotSummary:
    return Bot(policy, seed, cmap, pack, client, player_name, avatar, start_ms, deterministic_ids).run()


def run_population(
    n: int,
    base_seed: int,
    policy: BotPolicy,
    cmap: CityMap,
    pack: DilemmaPack,
    client: SessionClient,
    start_ms: int = SIM_EPOCH_MS,
    deterministic_ids: bool = True,
) -> tuple[PopulationReport, list[BotSummary]]:
    """Run n independent bots with seeds base_seed + i, sequentially.

    Sequential execution keeps the log byte-reproducible; concurrency tests
    drive bots from their own threads instead.
    """
    if n < 1:
        raise ValueError("population must be at least 1")
    t0 = time.perf_counter()
    summaries = [
        run_bot(
            policy,
            base_seed + i,
            cmap,
            pack,
            client,
            player_name=f"bot{i + 1:03d}",
            start_ms=start_ms,
            deterministic_ids=deterministic_ids,
        )
        for i in range(n)
    ]
    completions = sum(1 for s in summaries if s.completed)
    report = PopulationReport(
        sessions=n,
        completed=completions,
        total_actions=sum(s.answers for s in summaries),
        total_movements=sum(s.events_sent for s in summaries) - sum(s.answers for s in summaries) - completions,
        wall_time_s=time.perf_counter() - t0,
    )
    return report, summaries
