"""Interest measurements over the recorded telemetry.

Dwell attribution: for consecutive same-session movement samples, the time
gap (clamped at 2 s to ignore idle or disconnected stretches) is credited
to the grid cell of the earlier sample. Time-to-answer statistics use the
lower middle value as the median of an even count, which keeps every
reported number an observed one.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .dilemmas import DilemmaPack
from .errors import BadCellSize, UnknownQuestion
from .store import ActionRow, MovementRow

GAP_CLAMP_MS = 2000
PRE_PROMPT_RADIUS_FACTOR = 2.0


@dataclass(frozen=True)
class DwellGrid:
    cell_size: float
    origin: tuple[float, float]
    cells: Mapping[tuple[int, int], float]  # dwell seconds; zero-dwell cells omitted

    def total(self) -> float:
        return sum(self.cells.values())


@dataclass(frozen=True)
class QuestionStats:
    question_number: str
    n_answers: int
    tta_mean_ms: float
    tta_median_ms: int
    tta_max_ms: int
    choice_counts: Mapping[str, int]
    pre_prompt_dwell_s: float


@dataclass
class DwellAccumulator:
    """Streaming dwell computation; feeding samples one by one equals the batch."""

    cell_size: float
    _last: dict[str, MovementRow] = field(default_factory=dict)
    _cells: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.cell_size <= 0:
            raise BadCellSize(f"cell size {self.cell_size} must be positive")

    def add(self, row: MovementRow) -> None:
        prev = self._last.get(row.session_id)
        if prev is not None:
            gap_ms = min(row.timestamp - prev.timestamp, GAP_CLAMP_MS)
            if gap_ms > 0:
                cell = (
                    math.floor(prev.x_axis / self.cell_size),
                    math.floor(prev.z_axis / self.cell_size),
                )
                self._cells[cell] = self._cells.get(cell, 0.0) + gap_ms / 1000.0
        self._last[row.session_id] = row

    def grid(self) -> DwellGrid:
        cells = {c: v for c, v in self._cells.items() if v > 0.0}
        return DwellGrid(cell_size=self.cell_size, origin=(0.0, 0.0), cells=cells)


def dwell_map(movements: Sequence[MovementRow], cell_size: float) -> DwellGrid:
    """One-shot dwell grid over rows ordered by (session, timestamp)."""
    acc = DwellAccumulator(cell_size)
    for row in sorted(movements, key=lambda r: (r.session_id, r.timestamp)):
        acc.add(row)
    return acc.grid()


def hotspots(grid: DwellGrid, k: int) -> list[tuple[tuple[int, int], float]]:
    """Top-k cells by dwell, descending; ties break by ascending (i, j)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ranked = sorted(grid.cells.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def hotspot_report(grid: DwellGrid, k: int) -> list[dict]:
    """Hotspots as flat report rows with cell indices and world-space centers."""
    rows = []
    for (i, j), dwell in hotspots(grid, k):
        rows.append(
            {
                "cell_i": i,
                "cell_j": j,
                "center_x": (i + 0.5) * grid.cell_size,
                "center_z": (j + 0.5) * grid.cell_size,
                "dwell_seconds": dwell,
            }
        )
    return rows


def answer_distribution(actions: Iterable[ActionRow]) -> dict[str, dict[str, int]]:
    out: dict[str, Counter] = {}
    for row in actions:
        out.setdefault(row.question_number, Counter())[row.question_answer] += 1
    return {q: dict(sorted(c.items())) for q, c in sorted(out.items())}


def question_stats(
    actions: Sequence[ActionRow],
    movements: Sequence[MovementRow],
    pack: DilemmaPack,
) -> list[QuestionStats]:
    """Per-question time-to-answer stats, choice histogram, pre-prompt dwell.

    Pre-prompt dwell is the mean, over that question's answers, of the time
    a session spent within twice the trigger radius before its prompt opened
    (same clamped-gap attribution as dwell_map).
    """
    known = {d.id for d in pack.dilemmas}
    for row in actions:
        if row.question_number not in known:
            raise UnknownQuestion(f"action row references {row.question_number!r}, not in pack")

    by_session: dict[str, list[MovementRow]] = {}
    for row in sorted(movements, key=lambda r: (r.session_id, r.timestamp)):
        by_session.setdefault(row.session_id, []).append(row)

    stats = []
    for spec in sorted(pack.dilemmas, key=lambda d: d.numeric_id):
        answers = [a for a in actions if a.question_number == spec.id]
        if not answers:
            continue
        ttas = sorted(a.time_to_answer_ms for a in answers)
        n = len(ttas)
        dwell_total = 0.0
        for a in answers:
            prompt_ts = a.timestamp - a.time_to_answer_ms
            dwell_total += _dwell_near(
                by_session.get(a.session_id, []),
                (spec.trigger.x, spec.trigger.z),
                spec.trigger.radius * PRE_PROMPT_RADIUS_FACTOR,
                prompt_ts,
            )
        stats.append(
            QuestionStats(
                question_number=spec.id,
                n_answers=n,
                tta_mean_ms=sum(ttas) / n,
                tta_median_ms=ttas[(n - 1) // 2],
                tta_max_ms=ttas[-1],
                choice_counts=dict(sorted(Counter(a.question_answer for a in answers).items())),
                pre_prompt_dwell_s=dwell_total / n,
            )
        )
    return stats


def _dwell_near(
    session_rows: Sequence[MovementRow],
    center: tuple[float, float],
    radius: float,
    before_ts: int,
) -> float:
    total = 0.0
    r2 = radius * radius
    for prev, cur in zip(session_rows, session_rows[1:]):
        if prev.timestamp >= before_ts:
            break
        dx = prev.x_axis - center[0]
        dz = prev.z_axis - center[1]
        if dx * dx + dz * dz <= r2:
            gap = min(cur.timestamp - prev.timestamp, GAP_CLAMP_MS)
            if gap > 0:
                total += gap / 1000.0
    return total


def tta_report(stats: Sequence[QuestionStats]) -> list[dict]:
    return [
        {
            "question_number": s.question_number,
            "n_answers": s.n_answers,
            "tta_mean_ms": s.tta_mean_ms,
            "tta_median_ms": s.tta_median_ms,
            "tta_max_ms": s.tta_max_ms,
            "pre_prompt_dwell_s": s.pre_prompt_dwell_s,
        }
        for s in stats
    ]
