"""Domain types and scenario configuration.

Everything inside the package is SI. Human-friendly units (kgf, mm, degrees,
mm/s) are accepted only when a configuration document is read, and are
converted once by :func:`parse_quantity`.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Any, Mapping, NamedTuple, Sequence

import yaml

from .errors import ConfigError, ValidationError

G = 9.80665
KGF = G  # newtons per kilogram-force

_UNITS = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3},
    "force": {"N": 1.0, "kN": 1e3, "kgf": KGF},
    "mass": {"kg": 1.0, "g": 1e-3},
    "stiffness": {"N/m": 1.0, "N/mm": 1e3, "kN/m": 1e3},
    "speed": {"m/s": 1.0, "mm/s": 1e-3},
    "angle": {"rad": 1.0, "deg": math.pi / 180.0},
    "angular_speed": {"rad/s": 1.0, "deg/s": math.pi / 180.0},
    "time": {"s": 1.0, "ms": 1e-3},
    "damping": {"N*s/m": 1.0, "Ns/m": 1.0},
    "pressure": {"Pa": 1.0, "kPa": 1e3, "MPa": 1e6, "GPa": 1e9},
}

_QUANTITY_RE = re.compile(r"^\s*([-+0-9.eE]+)\s*([A-Za-z/*]+)?\s*$")


def parse_quantity(value, dimension: str, default_unit: str | None = None,
                   key: str = "?") -> float:
    """Convert a configured quantity to SI.

    ``value`` may be a bare number (interpreted in ``default_unit``, or SI when
    omitted), a string such as ``"60 kgf"``, or a mapping
    ``{"value": 60, "unit": "kgf"}``.
    """
    units = _UNITS[dimension]
    unit = default_unit
    if isinstance(value, Mapping):
        if "value" not in value:
            raise ConfigError(key, "quantity mapping needs a 'value'")
        unit = value.get("unit", default_unit)
        value = value["value"]
    if isinstance(value, str):
        m = _QUANTITY_RE.match(value)
        if not m:
            raise ConfigError(key, f"cannot parse quantity {value!r}")
        number, unit_text = m.groups()
        try:
            value = float(number)
        except ValueError:
            raise ConfigError(key, f"cannot parse quantity {value!r}") from None
        unit = unit_text or unit
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    scale = 1.0 if unit is None else units.get(unit)
    if scale is None:
        raise ConfigError(key, f"unknown {dimension} unit {unit!r}")
    return float(value) * scale


class Clamp(enum.Enum):
    """Settled clamp states; the value is the drive direction sign."""

    LEFT = -1
    STATIONARY = 0
    RIGHT = 1

    @property
    def sign(self) -> int:
        return self.value

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "Clamp":
        try:
            return {"left": cls.LEFT, "right": cls.RIGHT,
                    "stationary": cls.STATIONARY}[label]
        except KeyError:
            raise ValueError(f"unknown clamp state {label!r}") from None


@dataclass(frozen=True)
class Transitioning:
    """The cam is switching toward ``target``; ``remaining`` seconds left."""

    target: Clamp
    remaining: float

    def __post_init__(self):
        if not isinstance(self.target, Clamp):
            raise ValidationError("target", "must be a settled clamp state")
        if not self.remaining > 0:
            raise ValidationError("remaining", "must be > 0")

    @property
    def label(self) -> str:
        return f"to_{self.target.label}"


ClampState = Clamp | Transitioning


def is_settled(state: ClampState) -> bool:
    return isinstance(state, Clamp)


def drive_sign(state: ClampState) -> int:
    """Direction in which the drive carries a platform in ``state``.

    A switching cam holds the platform, so it contributes no motion.
    """
    return state.sign if isinstance(state, Clamp) else 0


def _positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise ValidationError(name, f"must be > 0, got {value!r}")


def _nonnegative(name, value):
    if not (math.isfinite(value) and value >= 0):
        raise ValidationError(name, f"must be >= 0, got {value!r}")


@dataclass(frozen=True)
class CableSystemConfig:
    """Geometry, stiffness and pretension of the shared cable set.

    ``span_length`` is the horizontal anchor-to-anchor distance. ``stiffness``
    is the end-to-end stiffness of one cable measured at ``reference_span``
    (the span itself when not given), so a segment of rest length ``L`` has
    stiffness ``stiffness * reference_span / L``. ``pretension`` is per cable.
    The robots' weight is carried by ``load_bearing_cables`` sets of
    ``cables_per_set`` cables each.
    """

    span_length: float
    stiffness: float
    pretension: float
    incline_angle: float = 0.0
    load_bearing_cables: int = 3
    cables_per_set: int = 2
    roller_radius: float = 0.02
    roller_omega: float = 0.105 / 0.02
    max_surface_speed: float = 0.120
    anchor_spacing: float | None = None
    reference_span: float | None = None

    def __post_init__(self):
        _positive("span_length", self.span_length)
        _positive("stiffness", self.stiffness)
        _nonnegative("pretension", self.pretension)
        _positive("roller_radius", self.roller_radius)
        _nonnegative("roller_omega", self.roller_omega)
        _positive("max_surface_speed", self.max_surface_speed)
        if not abs(self.incline_angle) < math.pi / 2:
            raise ValidationError("incline_angle", "|angle| must be < pi/2")
        for name in ("load_bearing_cables", "cables_per_set"):
            count = getattr(self, name)
            if isinstance(count, bool) or not isinstance(count, int) or count < 1:
                raise ValidationError(name, f"must be an integer >= 1, got {count!r}")
        if self.anchor_spacing is not None:
            _positive("anchor_spacing", self.anchor_spacing)
        if self.reference_span is not None:
            _positive("reference_span", self.reference_span)
        if self.surface_speed > self.max_surface_speed * (1 + 1e-12):
            raise ValidationError(
                "roller_omega",
                f"surface speed {self.surface_speed:.6g} m/s exceeds the rated "
                f"{self.max_surface_speed:.6g} m/s")

    @property
    def surface_speed(self) -> float:
        return self.roller_radius * self.roller_omega

    @property
    def total_cables(self) -> int:
        return self.load_bearing_cables * self.cables_per_set

    @property
    def axial_rigidity(self) -> float:
        """EA of a single cable in newtons."""
        return self.stiffness * (self.reference_span or self.span_length)

    def anchor_positions(self) -> list[float]:
        """Horizontal positions of all anchors, ends included."""
        xs = [0.0]
        if self.anchor_spacing:
            k = 1
            while k * self.anchor_spacing < self.span_length - 1e-9:
                xs.append(k * self.anchor_spacing)
                k += 1
        xs.append(self.span_length)
        return xs


@dataclass(frozen=True)
class CafeState:
    """One platform.

    ``x`` is the horizontal position along the span, ``z`` the vertical
    deviation from the anchor line (negative is sag). A zero mass is allowed
    at this level so massless test particles can probe the cable; scenario
    validation requires ``mass > 0``.
    """

    id: int
    mass: float
    x: float
    z: float = 0.0
    z_dot: float = 0.0
    clamp: ClampState = Clamp.STATIONARY
    damping: float = 5.0

    def __post_init__(self):
        _nonnegative("mass", self.mass)
        _nonnegative("damping", self.damping)
        if not math.isfinite(self.x):
            raise ValidationError("x", "must be finite")


@dataclass(frozen=True)
class ClampingParams:
    cam_radius: float = 0.01
    effective_modulus: float = 10e6
    theta_left: float = -math.pi / 2
    theta_stationary: float = 0.0
    theta_right: float = math.pi / 2
    cam_speed: float = math.radians(340.0)
    transition_duration: float = 0.3
    max_deformation: float = 1e-3
    friction_coefficient: float = 0.8

    def __post_init__(self):
        for name in ("cam_radius", "effective_modulus", "cam_speed",
                     "transition_duration", "max_deformation",
                     "friction_coefficient"):
            _positive(name, getattr(self, name))

    def cam_angle(self, state: Clamp) -> float:
        return {Clamp.LEFT: self.theta_left, Clamp.RIGHT: self.theta_right,
                Clamp.STATIONARY: self.theta_stationary}[state]


@dataclass(frozen=True)
class ClampTimeline:
    """Time-ordered clamp commands per platform id."""

    commands: Mapping[int, tuple[tuple[float, Clamp], ...]] = field(default_factory=dict)

    def __post_init__(self):
        frozen = {}
        for cafe_id, cmds in self.commands.items():
            cmds = tuple((float(t), Clamp(c)) for t, c in cmds)
            for t, _ in cmds:
                if not (math.isfinite(t) and t >= 0):
                    raise ValidationError(f"timeline[{cafe_id}]",
                                          f"command time must be >= 0, got {t}")
            for (t0, _), (t1, _) in zip(cmds, cmds[1:]):
                if not t1 > t0:
                    raise ValidationError(
                        f"timeline[{cafe_id}]",
                        f"times must be strictly increasing ({t0} then {t1})")
            frozen[int(cafe_id)] = cmds
        object.__setattr__(self, "commands", dict(sorted(frozen.items())))

    @classmethod
    def from_events(cls, events: Sequence[tuple[float, int, Clamp]]) -> "ClampTimeline":
        per = {}
        for t, cafe_id, cmd in sorted(events, key=lambda e: (e[1], e[0])):
            per.setdefault(cafe_id, []).append((t, cmd))
        return cls(per)

    def for_cafe(self, cafe_id: int) -> tuple[tuple[float, Clamp], ...]:
        return self.commands.get(cafe_id, ())

    def events(self) -> list[tuple[float, int, Clamp]]:
        out = [(t, i, c) for i, cmds in self.commands.items() for t, c in cmds]
        return sorted(out, key=lambda e: (e[0], e[1]))

    def conflicts(self, transition_duration: float) -> list[str]:
        """Commands issued while the previous switch is still in progress."""
        problems = []
        for cafe_id, cmds in self.commands.items():
            for (t0, _), (t1, _) in zip(cmds, cmds[1:]):
                if t1 - t0 < transition_duration - 1e-9:
                    problems.append(
                        f"cafe {cafe_id}: command at t={t1:g} s overlaps the "
                        f"switch started at t={t0:g} s "
                        f"({transition_duration:g} s switching time)")
        return problems


class Scenario(NamedTuple):
    system: CableSystemConfig
    clamping: ClampingParams
    cafes: tuple[CafeState, ...]
    timeline: ClampTimeline


def validate_scenario(scenario: Scenario) -> list[str]:
    """Cross-object checks that single types cannot make on their own."""
    system, clamping, cafes, timeline = scenario
    problems = []
    ids = [c.id for c in cafes]
    if len(set(ids)) != len(ids):
        problems.append("cafes: duplicate ids")
    for c in cafes:
        if not c.mass > 0:
            problems.append(f"cafes[{c.id}].mass_kg: must be > 0, got {c.mass!r}")
        if not 0 <= c.x <= system.span_length:
            problems.append(f"cafes[{c.id}].x0_m: must lie in [0, "
                            f"{system.span_length:g}], got {c.x!r}")
    for cafe_id in timeline.commands:
        if cafe_id not in ids:
            problems.append(f"timeline: unknown cafe_id {cafe_id}")
    problems.extend(f"timeline: {p}" for p in
                    timeline.conflicts(clamping.transition_duration))
    return problems


def default_paper_config() -> Scenario:
    """The 1.5 m laboratory rig with two 1.4 kg platforms near midspan."""
    system = CableSystemConfig(
        span_length=1.5,
        stiffness=18148.5,
        pretension=60 * KGF,
        incline_angle=0.0,
        load_bearing_cables=3,
        cables_per_set=2,
        roller_radius=0.02,
        roller_omega=0.105 / 0.02,
        max_surface_speed=0.120,
    )
    cafes = (CafeState(id=0, mass=1.4, x=0.70), CafeState(id=1, mass=1.4, x=0.80))
    return Scenario(system, ClampingParams(), cafes, ClampTimeline())


# -- documents ---------------------------------------------------------------

_SYSTEM_KEYS = {"span_length_m", "stiffness_n_per_m", "pretension", "incline_deg",
                "load_bearing_cables", "cables_per_set", "anchor_spacing_m",
                "reference_span_m"}
_ROLLER_KEYS = {"radius_m", "omega_rad_s", "surface_speed_mm_s",
                "max_surface_speed_mm_s"}
_CLAMPING_KEYS = {"cam_radius_m": ("cam_radius", "length", "m"),
                  "effective_modulus_pa": ("effective_modulus", "pressure", "Pa"),
                  "theta_left_deg": ("theta_left", "angle", "deg"),
                  "theta_stationary_deg": ("theta_stationary", "angle", "deg"),
                  "theta_right_deg": ("theta_right", "angle", "deg"),
                  "cam_speed_deg_s": ("cam_speed", "angular_speed", "deg/s"),
                  "transition_s": ("transition_duration", "time", "s"),
                  "max_deformation_mm": ("max_deformation", "length", "mm"),
                  "friction_coefficient": ("friction_coefficient", None, None)}
_CAFE_KEYS = {"mass_kg", "x0_m", "damping_c", "clamp"}
_EVENT_KEYS = {"t_s", "cafe_id", "state"}
_TOP_KEYS = {"system", "roller", "clamping", "cafes", "timeline",
             "simulation", "noise"}


def _section(doc, key, required=True):
    value = doc.get(key)
    if value is None:
        if required:
            raise ConfigError(key, "missing section")
        return {}
    if not isinstance(value, Mapping):
        raise ConfigError(key, "must be a mapping")
    return value


def _check_keys(mapping, allowed, prefix):
    for k in mapping:
        if k not in allowed:
            raise ConfigError(f"{prefix}.{k}", "unknown key")


def _require(mapping, key, prefix):
    if key not in mapping:
        raise ConfigError(f"{prefix}.{key}", "missing required key")
    return mapping[key]


def _as_int(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    return int(value)


def _invariant(key, build):
    """Run a constructor, re-labelling invariant failures with a document key."""
    try:
        return build()
    except ValidationError as exc:
        raise ValidationError(key, str(exc)) from None


_SYSTEM_FIELD_KEYS = {
    "span_length": "system.span_length_m", "stiffness": "system.stiffness_n_per_m",
    "pretension": "system.pretension", "incline_angle": "system.incline_deg",
    "load_bearing_cables": "system.load_bearing_cables",
    "cables_per_set": "system.cables_per_set",
    "anchor_spacing": "system.anchor_spacing_m",
    "reference_span": "system.reference_span_m",
    "roller_radius": "roller.radius_m", "roller_omega": "roller.omega_rad_s",
    "max_surface_speed": "roller.max_surface_speed_mm_s",
}


def _parse_system(doc) -> CableSystemConfig:
    sysd = _section(doc, "system")
    _check_keys(sysd, _SYSTEM_KEYS, "system")
    roller = _section(doc, "roller", required=False)
    _check_keys(roller, _ROLLER_KEYS, "roller")
    kw = {
        "span_length": parse_quantity(_require(sysd, "span_length_m", "system"),
                                      "length", "m", "system.span_length_m"),
        "stiffness": parse_quantity(_require(sysd, "stiffness_n_per_m", "system"),
                                    "stiffness", "N/m", "system.stiffness_n_per_m"),
        "pretension": parse_quantity(_require(sysd, "pretension", "system"),
                                     "force", "N", "system.pretension"),
        "incline_angle": parse_quantity(sysd.get("incline_deg", 0.0), "angle",
                                        "deg", "system.incline_deg"),
    }
    for name in ("load_bearing_cables", "cables_per_set"):
        if name in sysd:
            kw[name] = _as_int(sysd[name], f"system.{name}")
    if sysd.get("anchor_spacing_m") is not None:
        kw["anchor_spacing"] = parse_quantity(sysd["anchor_spacing_m"], "length",
                                              "m", "system.anchor_spacing_m")
    if sysd.get("reference_span_m") is not None:
        kw["reference_span"] = parse_quantity(sysd["reference_span_m"], "length",
                                              "m", "system.reference_span_m")
    if "radius_m" in roller:
        kw["roller_radius"] = parse_quantity(roller["radius_m"], "length", "m",
                                             "roller.radius_m")
    radius = kw.get("roller_radius", CableSystemConfig.roller_radius)
    if "omega_rad_s" in roller and "surface_speed_mm_s" in roller:
        raise ConfigError("roller", "give omega_rad_s or surface_speed_mm_s, not both")
    if "omega_rad_s" in roller:
        kw["roller_omega"] = parse_quantity(roller["omega_rad_s"], "angular_speed",
                                            "rad/s", "roller.omega_rad_s")
    elif "surface_speed_mm_s" in roller:
        kw["roller_omega"] = parse_quantity(
            roller["surface_speed_mm_s"], "speed", "mm/s",
            "roller.surface_speed_mm_s") / radius
    if "max_surface_speed_mm_s" in roller:
        kw["max_surface_speed"] = parse_quantity(
            roller["max_surface_speed_mm_s"], "speed", "mm/s",
            "roller.max_surface_speed_mm_s")
    try:
        return CableSystemConfig(**kw)
    except ValidationError as exc:
        raise ValidationError(_SYSTEM_FIELD_KEYS.get(exc.field, exc.field),
                              str(exc).split(": ", 1)[-1]) from None


def _parse_clamping(doc) -> ClampingParams:
    cd = _section(doc, "clamping", required=False)
    _check_keys(cd, _CLAMPING_KEYS, "clamping")
    kw = {}
    for key, (name, dim, unit) in _CLAMPING_KEYS.items():
        if key not in cd:
            continue
        if dim is None:
            value = cd[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"clamping.{key}", f"expected a number, got {value!r}")
            kw[name] = float(value)
        else:
            kw[name] = parse_quantity(cd[key], dim, unit, f"clamping.{key}")
    try:
        return ClampingParams(**kw)
    except ValidationError as exc:
        key = next(k for k, v in _CLAMPING_KEYS.items() if v[0] == exc.field)
        raise ValidationError(f"clamping.{key}", str(exc).split(": ", 1)[-1]) from None


def _parse_cafes(doc) -> tuple[CafeState, ...]:
    raw = doc.get("cafes") or []
    if not isinstance(raw, list):
        raise ConfigError("cafes", "must be a list")
    cafes = []
    for i, entry in enumerate(raw):
        prefix = f"cafes[{i}]"
        if not isinstance(entry, Mapping):
            raise ConfigError(prefix, "must be a mapping")
        _check_keys(entry, _CAFE_KEYS, prefix)
        mass = parse_quantity(_require(entry, "mass_kg", prefix), "mass", "kg",
                              f"{prefix}.mass_kg")
        x0 = parse_quantity(_require(entry, "x0_m", prefix), "length", "m",
                            f"{prefix}.x0_m")
        damping = parse_quantity(entry.get("damping_c", 5.0), "damping", "N*s/m",
                                 f"{prefix}.damping_c")
        try:
            clamp = Clamp.from_label(entry.get("clamp", "stationary"))
        except (ValueError, TypeError):
            raise ConfigError(f"{prefix}.clamp", "must be left|right|stationary") from None
        if not mass > 0:
            raise ValidationError(f"{prefix}.mass_kg", f"must be > 0, got {mass!r}")
        cafes.append(_invariant(prefix, lambda: CafeState(
            id=i, mass=mass, x=x0, clamp=clamp, damping=damping)))
    return tuple(cafes)


def _parse_timeline(doc) -> ClampTimeline:
    raw = doc.get("timeline") or []
    if not isinstance(raw, list):
        raise ConfigError("timeline", "must be a list")
    events = []
    for i, entry in enumerate(raw):
        prefix = f"timeline[{i}]"
        if not isinstance(entry, Mapping):
            raise ConfigError(prefix, "must be a mapping")
        _check_keys(entry, _EVENT_KEYS, prefix)
        t = parse_quantity(_require(entry, "t_s", prefix), "time", "s", f"{prefix}.t_s")
        cafe_id = _as_int(_require(entry, "cafe_id", prefix), f"{prefix}.cafe_id")
        try:
            state = Clamp.from_label(_require(entry, "state", prefix))
        except (ValueError, TypeError):
            raise ConfigError(f"{prefix}.state", "must be left|right|stationary") from None
        events.append((t, cafe_id, state))
    return _invariant("timeline", lambda: ClampTimeline.from_events(events))


def scenario_from_document(doc: Mapping[str, Any]) -> Scenario:
    """Build and validate a scenario from a parsed document.

    Raises:
        ConfigError: a key is missing, unknown or malformed.
        ValidationError: a value violates an invariant.
    """
    if not isinstance(doc, Mapping):
        raise ConfigError("<root>", "document must be a mapping")
    _check_keys(doc, _TOP_KEYS, "<root>")
    scenario = Scenario(_parse_system(doc), _parse_clamping(doc),
                        _parse_cafes(doc), _parse_timeline(doc))
    problems = validate_scenario(scenario)
    if problems:
        key, _, msg = problems[0].partition(": ")
        raise ValidationError(key, msg)
    return scenario


def collect_issues(doc: Mapping[str, Any]) -> list[str]:
    """All schema and invariant problems, one message per offending key path."""
    if not isinstance(doc, Mapping):
        return ["<root>: document must be a mapping"]
    issues = []
    try:
        _check_keys(doc, _TOP_KEYS, "<root>")
    except ConfigError as exc:
        issues.append(str(exc))
    parts = {}
    for name, parse in (("system", _parse_system), ("clamping", _parse_clamping),
                        ("cafes", _parse_cafes), ("timeline", _parse_timeline)):
        try:
            parts[name] = parse(doc)
        except (ConfigError, ValidationError) as exc:
            issues.append(str(exc))
    if len(parts) == 4:
        issues.extend(validate_scenario(Scenario(
            parts["system"], parts["clamping"], parts["cafes"], parts["timeline"])))
    return issues


def scenario_to_document(scenario: Scenario) -> dict:
    """Canonical SI document; parsing it back yields an equal scenario."""
    system, clamping, cafes, timeline = scenario
    sysd = {
        "span_length_m": system.span_length,
        "stiffness_n_per_m": system.stiffness,
        "pretension": {"value": system.pretension, "unit": "N"},
        "incline_deg": {"value": system.incline_angle, "unit": "rad"},
        "load_bearing_cables": system.load_bearing_cables,
        "cables_per_set": system.cables_per_set,
    }
    if system.anchor_spacing is not None:
        sysd["anchor_spacing_m"] = system.anchor_spacing
    if system.reference_span is not None:
        sysd["reference_span_m"] = system.reference_span
    clamp_doc = {}
    for key, (name, dim, _) in _CLAMPING_KEYS.items():
        value = getattr(clamping, name)
        si_unit = None if dim is None else next(
            u for u, s in _UNITS[dim].items() if s == 1.0)
        clamp_doc[key] = value if si_unit is None else {"value": value, "unit": si_unit}
    return {
        "system": sysd,
        "roller": {"radius_m": system.roller_radius,
                   "omega_rad_s": system.roller_omega,
                   "max_surface_speed_mm_s": {"value": system.max_surface_speed,
                                              "unit": "m/s"}},
        "clamping": clamp_doc,
        "cafes": [{"mass_kg": c.mass, "x0_m": c.x, "damping_c": c.damping,
                   "clamp": c.clamp.label if isinstance(c.clamp, Clamp)
                   else c.clamp.target.label}
                  for c in cafes],
        "timeline": [{"t_s": t, "cafe_id": i, "state": c.label}
                     for t, i, c in timeline.events()],
    }


def normalize_document(doc: Mapping[str, Any]) -> dict:
    """Parse, validate and re-emit ``doc`` in canonical SI form."""
    out = scenario_to_document(scenario_from_document(doc))
    for extra in ("simulation", "noise"):
        if doc.get(extra) is not None:
            out[extra] = dict(doc[extra])
    return out


def load_document(text: str) -> dict:
    """Parse YAML (JSON is accepted, being a YAML subset)."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<root>", f"not valid YAML: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "document must be a mapping")
    return doc


def load_config(text: str) -> Scenario:
    return scenario_from_document(load_document(text))


def dump_config(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario_to_document(scenario), sort_keys=False)


def system_from_document(doc: Mapping[str, Any]) -> CableSystemConfig:
    """Cable system from the ``system`` and optional ``roller`` sections."""
    return _parse_system(doc)
