"""Scalability studies: sag against pretension, span and platform count."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Any, Mapping, Sequence

from .dynamics import chain_from_positions, solve_equilibrium
from .errors import (ConfigError, DomainError, InfeasibleError, NonConvergenceError,
                     OutOfRangeError, ValidationError)
from .model import KGF, CableSystemConfig, CafeState, parse_quantity

DEFAULT_TENSION_CAP = 5000.0  # N per cable
CSV_COLUMNS = ("span_m", "count", "pretension_N", "max_sag_m", "max_tension_N", "converged")


@dataclass(frozen=True)
class Evenly:
    """Platforms at ``j * span / (n + 1)`` for ``j = 1..n``."""

    def positions(self, span: float, count: int) -> list[float]:
        return [j * span / (count + 1) for j in range(1, count + 1)]


@dataclass(frozen=True)
class Clustered:
    """Platforms ``spacing`` apart, centred on ``center`` metres."""

    center: float
    spacing: float = 0.1

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValidationError("placement.spacing_m", "must be > 0")

    def positions(self, span: float, count: int) -> list[float]:
        xs = [self.center + (j - 0.5 * (count - 1)) * self.spacing for j in range(count)]
        if xs and not (0.0 < xs[0] and xs[-1] < span):
            raise OutOfRangeError(
                f"{count} platforms around x={self.center:g} m do not fit in a "
                f"{span:g} m span")
        return xs


Placement = Evenly | Clustered


@dataclass(frozen=True)
class SweepSpec:
    span_lengths: tuple[float, ...]
    robot_counts: tuple[int, ...]
    pretensions: tuple[float, ...]
    robot_mass: float
    placement: Placement = Evenly()

    def __post_init__(self):
        object.__setattr__(self, "span_lengths", tuple(float(v) for v in self.span_lengths))
        object.__setattr__(self, "robot_counts", tuple(self.robot_counts))
        object.__setattr__(self, "pretensions", tuple(float(v) for v in self.pretensions))
        for name in ("span_lengths", "robot_counts", "pretensions"):
            values = getattr(self, name)
            if not values:
                raise ValidationError(name, "must not be empty")
            if not all(v > 0 and math.isfinite(v) for v in values):
                raise ValidationError(name, "all values must be positive and finite")
        if not all(isinstance(n, int) and not isinstance(n, bool) for n in self.robot_counts):
            raise ValidationError("robot_counts", "counts must be integers")
        if not self.robot_mass > 0:
            raise ValidationError("robot_mass", "must be > 0")

    @classmethod
    def from_document(cls, doc: Mapping[str, Any]) -> "SweepSpec":
        """Build a spec from a parsed YAML/JSON mapping.

        Keys: ``span_lengths_m``, ``robot_counts``, ``pretensions`` (per cable,
        numbers in newtons or strings such as ``"60 kgf"``), ``robot_mass_kg``
        and optional ``placement`` (``evenly`` or
        ``{clustered: {center_m, spacing_m}}``).
        """
        if not isinstance(doc, Mapping):
            raise ConfigError("sweep", "expected a mapping")
        allowed = {"span_lengths_m", "robot_counts", "pretensions", "robot_mass_kg",
                   "placement", "system", "roller"}
        unknown = set(doc) - allowed
        if unknown:
            raise ConfigError(f"sweep.{sorted(unknown)[0]}", "unknown key")
        try:
            spans = [parse_quantity(v, "length", "m", "sweep.span_lengths_m")
                     for v in _list(doc, "span_lengths_m")]
            counts = _list(doc, "robot_counts")
            tensions = [parse_quantity(v, "force", "N", "sweep.pretensions")
                        for v in _list(doc, "pretensions")]
            if "robot_mass_kg" not in doc:
                raise ConfigError("sweep.robot_mass_kg", "missing required key")
            mass = parse_quantity(doc["robot_mass_kg"], "mass", "kg", "sweep.robot_mass_kg")
            placement = _placement(doc.get("placement", "evenly"))
            return cls(tuple(spans), tuple(counts), tuple(tensions), mass, placement)
        except ValidationError as exc:
            raise ConfigError(f"sweep.{exc.field}", str(exc).split(": ", 1)[-1]) from None


def _list(doc, key):
    if key not in doc:
        raise ConfigError(f"sweep.{key}", "missing required key")
    value = doc[key]
    if not isinstance(value, list):
        raise ConfigError(f"sweep.{key}", "expected a list")
    return value


def _placement(value) -> Placement:
    if value == "evenly":
        return Evenly()
    if isinstance(value, Mapping) and set(value) == {"clustered"}:
        inner = value["clustered"]
        if not isinstance(inner, Mapping) or "center_m" not in inner:
            raise ConfigError("sweep.placement.clustered", "needs center_m")
        center = parse_quantity(inner["center_m"], "length", "m", "sweep.placement.center_m")
        spacing = parse_quantity(inner.get("spacing_m", 0.1), "length", "m",
                                 "sweep.placement.spacing_m")
        return Clustered(center, spacing)
    raise ConfigError("sweep.placement", f"expected 'evenly' or a clustered mapping, got {value!r}")


@dataclass(frozen=True)
class SweepCell:
    span: float
    count: int
    pretension: float
    max_sag: float
    max_tension: float
    converged: bool
    message: str = ""

    def row(self) -> list[str]:
        return [format(self.span, ".9g"), str(self.count), format(self.pretension, ".9g"),
                format(self.max_sag, ".9g"), format(self.max_tension, ".9g"),
                "true" if self.converged else "false"]


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    cells: tuple[SweepCell, ...]

    def cell(self, span: float, count: int, pretension: float) -> SweepCell:
        for c in self.cells:
            if (c.span, c.count, c.pretension) == (span, count, pretension):
                return c
        raise KeyError((span, count, pretension))

    def row(self, span: float, count: int) -> list[SweepCell]:
        """Cells at fixed span and count, in pretension order."""
        return [self.cell(span, count, p) for p in self.spec.pretensions]

    def column(self, count: int, pretension: float) -> list[SweepCell]:
        """Cells at fixed count and pretension, in span order."""
        return [self.cell(s, count, pretension) for s in self.spec.span_lengths]

    def monotonicity_violations(self, tol: float = 1e-12) -> list[str]:
        """Rows where sag grows with pretension or shrinks with span.

        Non-converged cells are skipped. ``tol`` is a relative slack.
        """
        issues = []
        for s in self.spec.span_lengths:
            for n in self.spec.robot_counts:
                sags = [(c.pretension, c.max_sag) for c in self.row(s, n) if c.converged]
                for (p0, a), (p1, b) in zip(sags, sags[1:]):
                    if (p1 > p0 and b > a * (1 + tol)) or (p1 < p0 and a > b * (1 + tol)):
                        issues.append(f"span {s:g} m, {n} platforms: sag rises from "
                                      f"{a:.6g} to {b:.6g} m between {p0:g} and {p1:g} N")
        for n in self.spec.robot_counts:
            for p in self.spec.pretensions:
                sags = [(c.span, c.max_sag) for c in self.column(n, p) if c.converged]
                for (s0, a), (s1, b) in zip(sags, sags[1:]):
                    if (s1 > s0 and b < a * (1 - tol)) or (s1 < s0 and a < b * (1 - tol)):
                        issues.append(f"{n} platforms at {p:g} N: sag falls from "
                                      f"{a:.6g} to {b:.6g} m between {s0:g} and {s1:g} m")
        return issues

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for c in self.cells:
            writer.writerow(c.row())
        return buf.getvalue()


def cell_system(base: CableSystemConfig, span: float, pretension: float) -> CableSystemConfig:
    """``base`` stretched to ``span`` at a per-cable ``pretension``.

    The cable itself is unchanged, so its axial rigidity stays that of the
    base span.
    """
    reference = base.reference_span or base.span_length
    return replace(base, span_length=span, pretension=pretension, reference_span=reference)


def max_sag_and_tension(system: CableSystemConfig, xs: Sequence[float],
                        mass: float) -> tuple[float, float]:
    """Equilibrium max |sag| (m) and max segment tension per cable (N).

    Raises:
        NonConvergenceError: the relaxation did not settle.
    """
    ids = list(range(1, len(xs) + 1))
    cafes = [CafeState(i, mass, x) for i, x in zip(ids, xs)]
    chain = chain_from_positions(system, ids, xs)
    eq = solve_equilibrium(chain, cafes)
    sag = max((abs(float(v)) for v in eq.z), default=0.0)
    tension = float(max(eq.forces.tension_per_cable, default=system.pretension))
    return sag, tension


def evaluate_cell(spec: SweepSpec, base: CableSystemConfig, span: float, count: int,
                  pretension: float) -> SweepCell:
    system = cell_system(base, span, pretension)
    xs = spec.placement.positions(span, count)
    try:
        sag, tension = max_sag_and_tension(system, xs, spec.robot_mass)
    except NonConvergenceError as exc:
        return SweepCell(span, count, pretension, math.nan, math.nan, False, str(exc))
    if not (math.isfinite(sag) and math.isfinite(tension)):
        return SweepCell(span, count, pretension, math.nan, math.nan, False, "non-finite result")
    return SweepCell(span, count, pretension, sag, tension, True)


def run_sweep(spec: SweepSpec, base: CableSystemConfig) -> SweepResult:
    """Evaluate every (span, count, pretension) cell of ``spec``.

    Cells are independent. A cell whose equilibrium does not converge is
    flagged with NaN values and the sweep carries on.

    Args:
        spec: grid and placement rule.
        base: cable properties shared by all cells. Its span length sets the
            axial rigidity for every span in the grid.

    Returns:
        Cells ordered by span, then count, then pretension.
    """
    cells = [evaluate_cell(spec, base, s, n, p)
             for s in spec.span_lengths
             for n in spec.robot_counts
             for p in spec.pretensions]
    return SweepResult(spec, tuple(cells))


def size_pretension(span: float, count: int, mass: float, sag_budget: float,
                    base: CableSystemConfig, placement: Placement = Evenly(),
                    t_min: float = 20 * KGF, cap: float = DEFAULT_TENSION_CAP,
                    max_iter: int = 200) -> float:
    """Smallest per-cable pretension keeping max sag within ``sag_budget``.

    Bisects between ``t_min`` and ``cap`` until the sag lands in
    ``[0.95, 1.0] * sag_budget`` and returns the bracket end that meets the
    budget. If ``t_min`` already meets it, ``t_min`` is returned.

    Raises:
        DomainError: non-positive budget or an empty bracket.
        InfeasibleError: even ``cap`` leaves the sag above budget.
    """
    if not sag_budget > 0:
        raise DomainError("sag budget must be > 0")
    if not 0 < t_min <= cap:
        raise DomainError(f"need 0 < t_min <= cap, got {t_min:g} and {cap:g}")
    xs = placement.positions(span, count)

    def sag_at(t):
        return max_sag_and_tension(cell_system(base, span, t), xs, mass)[0]

    if sag_at(t_min) <= sag_budget:
        return t_min
    sag_cap = sag_at(cap)
    if sag_cap > sag_budget:
        raise InfeasibleError(
            f"sag {sag_cap * 1e3:.4g} mm at the {cap:g} N cap exceeds the "
            f"{sag_budget * 1e3:.4g} mm budget", cap)
    lo, hi = t_min, cap
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        sag = sag_at(mid)
        if sag <= sag_budget:
            hi = mid
            if sag >= 0.95 * sag_budget:
                break
        else:
            lo = mid
    return hi
