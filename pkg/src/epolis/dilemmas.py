"""Dilemma packs: loading, validation, prompt selection, and choice effects.

A pack declares the city attributes and the dilemmas with their trigger
zones and per-choice attribute deltas. There is deliberately no notion of
a correct answer anywhere in this module; choices only shift attribute
accumulators.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Optional

from .errors import BadChoice, Diagnostic, ParseError, TimestampOrder, ValidationError
from .world import CityMap, TriggerZone, in_trigger

DILEMMA_ID = re.compile(r"^Q[0-9]+$")
CHOICE_ALPHABET = "ABCDEF"
MAX_EFFECT = 10
MAX_ATTRIBUTES = 16
DEFAULT_BASELINE = 50


@dataclass(frozen=True)
class EntityMeta:
    """Middleware categorization labels; carried verbatim, drives no behavior."""

    module_label: str
    behavior_label: str
    instance_frequency: str  # "unique" | "repeated"
    prefab_label: str


@dataclass(frozen=True)
class Choice:
    key: str
    text: str
    effects: Mapping[str, int]


@dataclass(frozen=True)
class DilemmaSpec:
    id: str
    description: str
    prompt: str
    choices: tuple[Choice, ...]
    trigger: TriggerZone
    entity_meta: EntityMeta

    @property
    def numeric_id(self) -> int:
        return int(self.id[1:])

    def choice(self, key: str) -> Choice:
        for c in self.choices:
            if c.key == key:
                return c
        raise BadChoice(f"{self.id} has no choice {key!r}")


@dataclass(frozen=True)
class DilemmaPack:
    pack_id: str
    attributes: tuple[str, ...]
    baseline: int
    dilemmas: tuple[DilemmaSpec, ...]

    @property
    def size(self) -> int:
        return len(self.dilemmas)

    def get(self, dilemma_id: str) -> DilemmaSpec:
        for d in self.dilemmas:
            if d.id == dilemma_id:
                return d
        raise KeyError(dilemma_id)


@dataclass(frozen=True)
class CityState:
    """Accumulated attribute deltas; unclamped, clamping happens in score()."""

    baseline: int
    deltas: Mapping[str, int]

    @staticmethod
    def initial(pack: DilemmaPack) -> "CityState":
        return CityState(pack.baseline, MappingProxyType({}))

    def score(self, attribute: str) -> int:
        raw = self.baseline + self.deltas.get(attribute, 0)
        return max(0, min(100, raw))


@dataclass(frozen=True)
class AnswerRecord:
    question_number: str
    question_description: str
    choice_key: str
    answer_ts: int
    time_to_answer_ms: int


def load_pack(document: str, cmap: CityMap) -> DilemmaPack:
    """Parse and validate a dilemma pack against its companion map.

    Validation is total: every violated invariant is reported in one
    ValidationError; a malformed JSON document raises ParseError.
    Unknown keys are tolerated so pack authors can annotate content.
    """
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"pack is not valid JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from None
    if not isinstance(obj, dict):
        raise ParseError("pack document must be a JSON object")

    diags: list[Diagnostic] = []

    pack_id = obj.get("pack_id")
    if not isinstance(pack_id, str) or not pack_id:
        diags.append(Diagnostic("BadField", "pack_id must be a non-empty string"))
        pack_id = ""

    attributes = obj.get("attributes")
    attr_tuple: tuple[str, ...] = ()
    if (
        not isinstance(attributes, list)
        or not all(isinstance(a, str) and a for a in attributes)
        or not 1 <= len(attributes) <= MAX_ATTRIBUTES
    ):
        diags.append(Diagnostic("BadAttributes", f"attributes must be 1..{MAX_ATTRIBUTES} non-empty names"))
    elif len(set(attributes)) != len(attributes):
        diags.append(Diagnostic("BadAttributes", "attribute names must be unique"))
    else:
        attr_tuple = tuple(attributes)

    baseline = obj.get("baseline", DEFAULT_BASELINE)
    if not isinstance(baseline, int) or isinstance(baseline, bool) or not 0 <= baseline <= 100:
        diags.append(Diagnostic("BadField", "baseline must be an integer in [0, 100]"))
        baseline = DEFAULT_BASELINE

    raw_dilemmas = obj.get("dilemmas")
    if not isinstance(raw_dilemmas, list):
        diags.append(Diagnostic("NoDilemmas", "pack declares no dilemma list"))
        raw_dilemmas = []
    elif not raw_dilemmas:
        diags.append(Diagnostic("NoDilemmas", "pack must contain at least one dilemma"))

    reachable = cmap.reachable_from_spawns()
    seen_ids: set[str] = set()
    dilemmas: list[DilemmaSpec] = []
    for idx, raw in enumerate(raw_dilemmas):
        spec = _parse_dilemma(raw, idx, cmap, reachable, set(attr_tuple), diags)
        if spec is None:
            continue
        if spec.id in seen_ids:
            diags.append(Diagnostic("DuplicateId", f"dilemma id {spec.id} appears more than once"))
            continue
        seen_ids.add(spec.id)
        dilemmas.append(spec)

    if diags:
        raise ValidationError(diags)
    return DilemmaPack(pack_id=pack_id, attributes=attr_tuple, baseline=baseline, dilemmas=tuple(dilemmas))


def _parse_dilemma(raw, idx, cmap, reachable, attr_names, diags) -> Optional[DilemmaSpec]:
    where = f"dilemmas[{idx}]"
    if not isinstance(raw, dict):
        diags.append(Diagnostic("BadField", f"{where} must be an object"))
        return None

    did = raw.get("id")
    if not isinstance(did, str) or not DILEMMA_ID.match(did):
        diags.append(Diagnostic("BadIdFormat", f"{where}: id {did!r} does not match Q<number>"))
        return None
    where = did

    ok = True
    description = raw.get("description")
    prompt = raw.get("prompt")
    for field, value in (("description", description), ("prompt", prompt)):
        if not isinstance(value, str) or not value:
            diags.append(Diagnostic("BadField", f"{where}: {field} must be a non-empty string"))
            ok = False

    choices = _parse_choices(raw.get("choices"), where, attr_names, diags)
    trigger = _parse_trigger(raw.get("trigger"), where, cmap, reachable, diags)
    meta = _parse_meta(raw.get("entity_meta"), where, diags)
    if not ok or choices is None or trigger is None or meta is None:
        return None
    return DilemmaSpec(
        id=did, description=description, prompt=prompt,
        choices=choices, trigger=trigger, entity_meta=meta,
    )


def _parse_choices(raw, where, attr_names, diags) -> Optional[tuple[Choice, ...]]:
    if not isinstance(raw, list) or not 2 <= len(raw) <= len(CHOICE_ALPHABET):
        diags.append(Diagnostic("BadChoiceKeys", f"{where}: choices must be a list of 2..{len(CHOICE_ALPHABET)}"))
        return None
    ok = True
    parsed: list[Choice] = []
    for i, c in enumerate(raw):
        expected = CHOICE_ALPHABET[i]
        if not isinstance(c, dict):
            diags.append(Diagnostic("BadField", f"{where}: choices[{i}] must be an object"))
            ok = False
            continue
        key = c.get("key")
        if key != expected:
            diags.append(Diagnostic("BadChoiceKeys", f"{where}: choice {i} has key {key!r}, expected {expected!r}"))
            ok = False
        text = c.get("text")
        if not isinstance(text, str) or not text:
            diags.append(Diagnostic("BadField", f"{where}: choices[{i}].text must be a non-empty string"))
            ok = False
        effects = c.get("effects", {})
        if not isinstance(effects, dict):
            diags.append(Diagnostic("BadField", f"{where}: choices[{i}].effects must be an object"))
            ok = False
            effects = {}
        for attr, delta in effects.items():
            if attr not in attr_names:
                diags.append(Diagnostic("UnknownAttribute", f"{where}: choice {key!r} affects unknown attribute {attr!r}"))
                ok = False
            if not isinstance(delta, int) or isinstance(delta, bool) or abs(delta) > MAX_EFFECT:
                diags.append(Diagnostic("BadEffectDelta", f"{where}: delta {attr}={delta!r} outside [-{MAX_EFFECT}, {MAX_EFFECT}]"))
                ok = False
        if ok:
            parsed.append(Choice(key=key, text=text, effects=MappingProxyType(dict(effects))))
    return tuple(parsed) if ok else None


def _parse_trigger(raw, where, cmap, reachable, diags) -> Optional[TriggerZone]:
    if not isinstance(raw, dict):
        diags.append(Diagnostic("BadField", f"{where}: trigger must be an object with x, z, radius"))
        return None
    try:
        x = float(raw["x"])
        z = float(raw["z"])
        radius = float(raw["radius"])
    except (KeyError, TypeError, ValueError):
        diags.append(Diagnostic("BadField", f"{where}: trigger needs numeric x, z, radius"))
        return None
    ok = True
    if not 0 < radius <= 10 * cmap.cell_size:
        diags.append(Diagnostic("BadTriggerRadius", f"{where}: radius {radius} outside (0, {10 * cmap.cell_size}]"))
        ok = False
    if not cmap.in_bounds(x, z):
        diags.append(Diagnostic("TriggerOffStreet", f"{where}: trigger center ({x}, {z}) is outside the map"))
        ok = False
    else:
        cell = cmap.cell_of(x, z)
        if cmap.rows[cell[1]][cell[0]] != ".":
            diags.append(Diagnostic("TriggerOffStreet", f"{where}: trigger center ({x}, {z}) is not on a street cell"))
            ok = False
        elif cell not in reachable:
            diags.append(Diagnostic("TriggerUnreachable", f"{where}: trigger cell {cell} cannot be reached from any spawn"))
            ok = False
    return TriggerZone(x=x, z=z, radius=radius) if ok else None


def _parse_meta(raw, where, diags) -> Optional[EntityMeta]:
    if not isinstance(raw, dict):
        diags.append(Diagnostic("BadEntityMeta", f"{where}: entity_meta must be an object"))
        return None
    labels = {}
    ok = True
    for field in ("module_label", "behavior_label", "instance_frequency", "prefab_label"):
        value = raw.get(field)
        if not isinstance(value, str) or not value:
            diags.append(Diagnostic("BadEntityMeta", f"{where}: entity_meta.{field} must be a non-empty string"))
            ok = False
        labels[field] = value
    if ok and labels["instance_frequency"] not in ("unique", "repeated"):
        diags.append(Diagnostic("BadEntityMeta", f"{where}: instance_frequency must be 'unique' or 'repeated'"))
        ok = False
    return EntityMeta(**labels) if ok else None


def open_prompt(pack: DilemmaPack, answered: set[str], position: tuple[float, float]) -> Optional[str]:
    """Id of the nearest unanswered dilemma whose trigger contains position.

    Ties break by ascending numeric id; None when no trigger matches.
    """
    best: Optional[tuple[float, int, str]] = None
    for spec in pack.dilemmas:
        if spec.id in answered or not in_trigger(position, spec.trigger):
            continue
        dx = position[0] - spec.trigger.x
        dz = position[1] - spec.trigger.z
        key = (dx * dx + dz * dz, spec.numeric_id, spec.id)
        if best is None or key < best:
            best = key
    return best[2] if best else None


def record_answer(spec: DilemmaSpec, choice_key: str, prompt_ts: int, answer_ts: int) -> AnswerRecord:
    """Build the immutable answer record, including time-to-answer."""
    spec.choice(choice_key)  # raises BadChoice for unknown keys
    if answer_ts < prompt_ts:
        raise TimestampOrder(f"answer at {answer_ts} precedes prompt at {prompt_ts}")
    return AnswerRecord(
        question_number=spec.id,
        question_description=spec.description,
        choice_key=choice_key,
        answer_ts=answer_ts,
        time_to_answer_ms=answer_ts - prompt_ts,
    )


def apply_effects(state: CityState, spec: DilemmaSpec, choice_key: str) -> CityState:
    """Accumulate the choice's deltas; accumulation is unclamped integer addition."""
    choice = spec.choice(choice_key)
    deltas = dict(state.deltas)
    for attr, delta in choice.effects.items():
        deltas[attr] = deltas.get(attr, 0) + delta
    return CityState(state.baseline, MappingProxyType(deltas))
