"""Behaviors over the inferred KB: "can I do behavior B with performance x?"

A behavior is a named capability bound, through a ProcessingRequirement
relation, to the effect creation its configuration must produce. It is
feasible when some inferred processing relation outputs a creation of the
effect's class that meets the effect's featured constraints. Expected
performance comes from the behavior's trained map plus the position
inaccuracy formula for its modality (visual: localization error + sqrt of
target distance; acoustic: half the room diagonal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .assess.metrics import (DEFAULT_ROBOT_POS_ACCURACY, DEFAULT_VOICE_DB,
                             acoustic_position_inaccuracy,
                             acoustic_quality_margin,
                             visual_position_inaccuracy)
from .assess.som import Prediction, SomMap, predict
from .inference import _by_id, _constraints_of, _num, _satisfies
from .kb import KbError, KnowledgeBase

MODALITIES = ("visual", "acoustic")


class StaleKbError(KbError):
    """Asserted facts changed after the last fixpoint; run infer first."""


@dataclass
class BehaviorInfo:
    name: str
    instance_id: str
    effect_id: str
    effect_class: str
    modality: Optional[str]
    requirement_id: str


@dataclass
class AssessmentResult:
    behavior: str
    feasible: bool
    p_success: Optional[float] = None
    position_inaccuracy: Optional[float] = None
    supporting_processing: list[str] = field(default_factory=list)
    bmu: Optional[tuple[int, int]] = None


# ----- registration ------------------------------------------------------

def register_behavior(kb: KnowledgeBase, name: str, effect_class: str,
                      featured_props: Optional[Mapping[str, Mapping]] = None,
                      modality: Optional[str] = None) -> str:
    """Assert a behavior, its effect creation, and their ProcessingRequirement.

    featured_props maps an attribute class to constraint bounds, e.g.
    {"Quality": {"min": 0.9}}; an optional "unit" entry becomes the
    attribute's own value. Marks the KB dirty: run the fixpoint before
    asking feasibility questions again.
    """
    if name in behaviors_in(kb):
        raise KbError(f"behavior name already registered: {name!r}")
    cls = kb.classes.get(effect_class)
    if cls is None:
        raise KbError(f"unknown class: {effect_class!r}")
    if not cls.is_a("Creation"):
        raise KbError(f"behavior effect class must be a Creation, got {effect_class!r}")
    if modality is not None and modality not in MODALITIES:
        raise KbError(f"modality must be one of {MODALITIES}, got {modality!r}")

    behavior = kb.assert_instance("Behavior")
    name_attr = kb.assert_instance("Name", name)
    kb.add_has(behavior.id, name_attr.id)
    if modality:
        modality_attr = kb.assert_instance("Modality", modality)
        kb.add_has(behavior.id, modality_attr.id)
    effect = kb.assert_instance(effect_class)
    for attr_class, bounds in (featured_props or {}).items():
        attr = kb.assert_instance(attr_class, bounds.get("unit", math.nan))
        kb.add_has(effect.id, attr.id)
        for key, range_class in (("exact", "Exact"), ("min", "Min"), ("max", "Max")):
            if key in bounds:
                bound = kb.assert_instance(range_class, float(bounds[key]))
                kb.add_has(attr.id, bound.id)
    requirement = kb.assert_instance("ProcessingRequirement")
    kb.add_role(requirement.id, "petitioner", behavior.id)
    kb.add_role(requirement.id, "effect", effect.id)
    return behavior.id


def behaviors_in(kb: KnowledgeBase) -> dict[str, BehaviorInfo]:
    """Registered behaviors keyed by name, reconstructed from KB facts."""
    out: dict[str, BehaviorInfo] = {}
    for behavior in _by_id(kb.instances_of("Behavior")):
        names = sorted(str(a.effective_value())
                       for a in kb.query_has(behavior.id, "Name"))
        if not names:
            continue
        name = names[0]
        modalities = sorted(str(a.effective_value())
                            for a in kb.query_has(behavior.id, "Modality"))
        modality = modalities[0] if modalities else None
        for rel in _by_id(kb.query_role(behavior.id, "petitioner")):
            if not rel.cls.is_a("ProcessingRequirement"):
                continue
            effects = _by_id(kb.query_role(rel.id, "effect"))
            if not effects:
                continue
            out[name] = BehaviorInfo(
                name=name, instance_id=behavior.id, effect_id=effects[0].id,
                effect_class=effects[0].class_name, modality=modality,
                requirement_id=rel.id)
            break
    return out


# ----- feasibility --------------------------------------------------------

def _effect_constraints(kb: KnowledgeBase, effect_id: str):
    """(attribute class, constraints) pairs featured on the effect."""
    out = []
    for attr in _by_id(kb.query_has(effect_id, "Attribute")):
        out.append((attr.class_name, _constraints_of(kb, attr.id)))
    return out


def _output_satisfies(kb: KnowledgeBase, output_id: str, constraints) -> bool:
    for attr_class, bounds in constraints:
        ok = False
        for attr in kb.query_has(output_id, attr_class):
            value = _num(attr.effective_value())
            if bounds:
                if value is not None and _satisfies(value, bounds):
                    ok = True  # NaN and non-numeric values fail bounded checks
                    break
            else:
                ok = True  # unconstrained featured property: presence suffices
                break
        if not ok:
            return False
    return True


def _component_products(kb: KnowledgeBase) -> set[str]:
    """Creations produced by some component (products of Require relations)."""
    out = set()
    for req in kb.instances_of("Require"):
        for role in ("output", "outcome"):
            out.update(i.id for i in kb.query_role(req.id, role))
    return out


def _grounded_inputs(kb: KnowledgeBase) -> set[str]:
    """Requesters realized by at least one provider nothing has to produce.

    A behavior's configuration must be up and running end to end, so the
    head of a supporting processing chain has to draw on creations that
    are simply present (environment phenomena, standing resources or
    data), not on the promised product of yet another component.
    """
    products = _component_products(kb)
    grounded = set()
    for rel in kb.instances_of("Realizing"):
        providers = kb.query_role(rel.id, "provider")
        if any(p.id not in products for p in providers):
            grounded.update(i.id for i in kb.query_role(rel.id, "requester"))
    return grounded


def supporting_processings(kb: KnowledgeBase, info: BehaviorInfo) -> list[str]:
    """Inferred processings that satisfy the behavior's requirement: the
    output matches the effect class and constraints, and every input of
    the chain is realized from grounded (non-product) providers."""
    constraints = _effect_constraints(kb, info.effect_id)
    grounded = _grounded_inputs(kb)
    supporting = []
    for rel in _by_id(kb.instances_of("Processing")):
        inputs = kb.query_role(rel.id, "input")
        if any(i.id not in grounded for i in inputs):
            continue
        for output in _by_id(kb.query_role(rel.id, "output")):
            if not output.cls.is_a(info.effect_class):
                continue
            if _output_satisfies(kb, output.id, constraints):
                supporting.append(rel.id)
                break
    return supporting


def _require_fresh(kb: KnowledgeBase):
    if kb.dirty:
        raise StaleKbError("knowledge base changed since the last fixpoint; "
                           "run infer first")


def feasible_behaviors(kb: KnowledgeBase) -> set[str]:
    _require_fresh(kb)
    return {name for name, info in behaviors_in(kb).items()
            if supporting_processings(kb, info)}


# ----- conditions ----------------------------------------------------------

@dataclass
class AssessmentFeatures:
    """Current conditions and internal readings, in SI-ish units."""
    noise_db: Optional[float] = None
    voice_db: float = DEFAULT_VOICE_DB
    human_prob: Optional[float] = None
    position_inaccuracy: Optional[float] = None
    robot_pos_accuracy: float = DEFAULT_ROBOT_POS_ACCURACY
    target_distance: Optional[float] = None
    brightness: Optional[float] = None
    contrast: Optional[float] = None
    light_intensity: Optional[float] = None
    visibility: Optional[float] = None
    room_width: Optional[float] = None
    room_length: Optional[float] = None
    extras: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.human_prob is not None and not 0.0 <= self.human_prob <= 1.0:
            raise ValueError(f"human_prob must be within [0, 1], got {self.human_prob}")
        for label in ("position_inaccuracy", "robot_pos_accuracy", "target_distance",
                      "light_intensity", "room_width", "room_length"):
            value = getattr(self, label)
            if value is not None and value < 0:
                raise ValueError(f"{label} must be >= 0, got {value}")

    def feature_dict(self) -> dict[str, float]:
        """Every derivable named feature, for matching a map's feature list."""
        out = dict(self.extras)
        for label in ("noise_db", "voice_db", "human_prob", "robot_pos_accuracy",
                      "target_distance", "brightness", "contrast",
                      "light_intensity", "visibility", "room_width",
                      "room_length", "position_inaccuracy"):
            value = getattr(self, label)
            if value is not None:
                out[label] = float(value)
        if self.noise_db is not None:
            out["acoustic_margin"] = acoustic_quality_margin(self.noise_db, self.voice_db)
        if self.target_distance is not None:
            out["visual_position_inaccuracy"] = visual_position_inaccuracy(
                self.robot_pos_accuracy, self.target_distance)
        if self.room_width is not None and self.room_length is not None:
            out["acoustic_position_inaccuracy"] = acoustic_position_inaccuracy(
                self.room_width, self.room_length)
        return out


def _first_quantity(kb, owner_id: str, attr_class: str, unit: Optional[str] = None):
    for attr in _by_id(kb.query_has(owner_id, attr_class)):
        if unit is not None and attr.effective_value() != unit:
            continue
        for exact in _by_id(kb.query_has(attr.id, "Exact")):
            value = _num(exact.effective_value())
            if value is not None:
                return value
    return None


def _first_plain(kb, owner_id: str, attr_class: str):
    for attr in _by_id(kb.query_has(owner_id, attr_class)):
        value = _num(attr.effective_value())
        if value is not None:
            return value
    return None


def conditions_from_kb(kb: KnowledgeBase) -> AssessmentFeatures:
    """Read an environment snapshot out of asserted phenomena and room facts.

    Sound intensity (dB) becomes the noise level, light intensity the lumen
    reading, any phenomenon's Visibility the visibility ratio; a Room's
    Width/Length/Distance give geometry, and Brightness/Contrast readings
    are picked up wherever they are attached.
    """
    features = AssessmentFeatures()
    for sound in _by_id(kb.instances_of("Sound")):
        value = _first_quantity(kb, sound.id, "Intensity")
        if value is not None:
            features.noise_db = value
            break
    for light in _by_id(kb.instances_of("Light")):
        value = _first_quantity(kb, light.id, "Intensity")
        if value is not None:
            features.light_intensity = value
            break
    for phenom in _by_id(kb.instances_of("PhysicalPhenomena")):
        value = _first_quantity(kb, phenom.id, "Visibility")
        if value is not None:
            features.visibility = value
            break
    for room in _by_id(kb.instances_of("Room")):
        width = _first_plain(kb, room.id, "Width")
        length = _first_plain(kb, room.id, "Length")
        distance = _first_plain(kb, room.id, "Distance")
        if width is not None:
            features.room_width = width
        if length is not None:
            features.room_length = length
        if distance is not None:
            features.target_distance = distance
        if width is not None or length is not None:
            break
    for inst in _by_id(kb.instances_of("Brightness")):
        value = _num(inst.effective_value())
        if value is not None:
            features.brightness = value
            break
    for inst in _by_id(kb.instances_of("Contrast")):
        value = _num(inst.effective_value())
        if value is not None:
            features.contrast = value
            break
    return features


# ----- assessment and selection --------------------------------------------

def _position_for(info: BehaviorInfo, conditions: AssessmentFeatures) -> Optional[float]:
    modality = info.modality
    if modality is None:  # fall back on whichever formula has its inputs
        has_visual = conditions.target_distance is not None
        has_acoustic = (conditions.room_width is not None
                        and conditions.room_length is not None)
        if has_visual == has_acoustic:
            return conditions.position_inaccuracy
        modality = "visual" if has_visual else "acoustic"
    if modality == "visual":
        if conditions.target_distance is None:
            return conditions.position_inaccuracy
        return visual_position_inaccuracy(conditions.robot_pos_accuracy,
                                          conditions.target_distance)
    if conditions.room_width is None or conditions.room_length is None:
        return conditions.position_inaccuracy
    return acoustic_position_inaccuracy(conditions.room_width, conditions.room_length)


def assess_behavior(kb: KnowledgeBase, name: str, conditions: AssessmentFeatures,
                    som: Optional[SomMap] = None) -> AssessmentResult:
    infos = behaviors_in(kb)
    info = infos.get(name)
    if info is None:
        raise KbError(f"unknown behavior: {name!r}")
    _require_fresh(kb)
    supporting = supporting_processings(kb, info)
    result = AssessmentResult(
        behavior=name,
        feasible=bool(supporting),
        supporting_processing=supporting,
        position_inaccuracy=_position_for(info, conditions),
    )
    if result.feasible and som is not None:
        prediction: Prediction = predict(som, conditions.feature_dict())
        result.p_success = prediction.p_success
        result.bmu = prediction.bmu
    return result


def select_behavior(kb: KnowledgeBase, conditions: AssessmentFeatures,
                    maps: Optional[Mapping[str, SomMap]] = None,
                    min_performance: Optional[float] = None) -> Optional[str]:
    """Feasible behavior with the best predicted success; lexicographic ties.

    Behaviors without a bound map rank below any with one and never meet a
    min_performance threshold.
    """
    maps = maps or {}
    _require_fresh(kb)
    best_name = None
    best_score = None
    for name in sorted(feasible_behaviors(kb)):
        som = maps.get(name)
        score = None
        if som is not None:
            score = predict(som, conditions.feature_dict()).p_success
        if min_performance is not None and (score is None or score < min_performance):
            continue
        ranked = score if score is not None else float("-inf")
        if best_score is None or ranked > best_score:
            best_name, best_score = name, ranked
    return best_name


def can_i_do_it(kb: KnowledgeBase, name: str, min_performance: float,
                conditions: AssessmentFeatures,
                som: Optional[SomMap] = None) -> tuple[bool, AssessmentResult]:
    """Yes iff the behavior is feasible and predicted to meet the threshold."""
    result = assess_behavior(kb, name, conditions, som)
    if not result.feasible:
        return False, result
    if result.p_success is None:
        raise KbError(f"behavior {name!r} has no trained map bound; "
                      "cannot check the requested performance")
    return result.p_success >= min_performance, result
