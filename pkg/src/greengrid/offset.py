"""Exact integer carbon-offset planning.

Two modes over a set of offset projects with per-unit costs (currency minor
units per MTCO2e) and optional budget-share floors:

  max_offset: maximize total offset units within budget J; among offset-optimal
              plans minimize cost, then take the lexicographically smallest
              allocation by project order.
  min_cost:   reach a target offset with minimal spend; same tie-breaking.
              Share floors are defined against the budget J and therefore
              apply only in budget mode.

The solver is a depth-first branch-and-bound over integer allocations in
project order. Because every unit contributes one MTCO2e regardless of
project, the greedy relaxation (fill cheapest remaining units first) gives
tight bounds on both achievable units and cost, so the search prunes to the
optimal path quickly while remaining exact. Currency is integer minor units
end to end.
"""

import json
import logging
import math
from dataclasses import dataclass, field

from .errors import InfeasibleError, SchemaError

logger = logging.getLogger(__name__)

STANDARD_PROJECTS = ("wind", "solar", "biomass", "energy_efficiency",
                     "agroforestry")

MODE_MAX_OFFSET = "max_offset"
MODE_MIN_COST = "min_cost"


@dataclass(frozen=True)
class OffsetProject:
    name: str
    unit_cost: int  # minor units per MTCO2e
    min_share: float = 0.0
    enabled: bool = True
    annotations: tuple = ()  # contextual notes (regulations, incentives)

    def __post_init__(self):
        if not isinstance(self.unit_cost, int) or self.unit_cost <= 0:
            raise SchemaError(
                f"project {self.name!r}: unit_cost must be a positive integer "
                "(minor units)")
        if not 0 <= self.min_share <= 1:
            raise SchemaError(f"project {self.name!r}: min_share out of [0, 1]")


@dataclass(frozen=True)
class OffsetInstance:
    projects: tuple
    mode: str
    budget: int | None = None  # minor units, max_offset mode
    target_offset: int | None = None  # MTCO2e, min_cost mode

    def __post_init__(self):
        if self.mode not in (MODE_MAX_OFFSET, MODE_MIN_COST):
            raise SchemaError(f"unknown mode {self.mode!r}")
        if self.mode == MODE_MAX_OFFSET:
            if self.budget is None or self.budget <= 0:
                raise SchemaError("budget must be > 0 in max_offset mode")
        else:
            if self.target_offset is None or self.target_offset < 0:
                raise SchemaError("target_offset must be >= 0 in min_cost mode")
        share_sum = sum(p.min_share for p in self.projects if p.enabled)
        if share_sum > 1 + 1e-9:
            raise SchemaError(
                f"enabled share floors sum to {share_sum:.3f} > 1")

    @property
    def enabled_projects(self) -> list[OffsetProject]:
        return [p for p in self.projects if p.enabled]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "budget": self.budget,
            "target_offset": self.target_offset,
            "projects": [{
                "name": p.name, "unit_cost": p.unit_cost,
                "min_share": p.min_share, "enabled": p.enabled,
                "annotations": list(p.annotations),
            } for p in self.projects],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OffsetInstance":
        projects = tuple(OffsetProject(
            name=p["name"], unit_cost=p["unit_cost"],
            min_share=p.get("min_share", 0.0),
            enabled=p.get("enabled", True),
            annotations=tuple(p.get("annotations", ())),
        ) for p in d["projects"])
        return cls(projects=projects, mode=d["mode"],
                   budget=d.get("budget"), target_offset=d.get("target_offset"))

    @classmethod
    def from_json(cls, text: str) -> "OffsetInstance":
        return cls.from_dict(json.loads(text))


@dataclass
class OffsetPlan:
    allocations: dict  # project name -> integer offset units
    total_offset: int
    total_cost: int
    feasible: bool
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "allocations": self.allocations,
            "total_offset": self.total_offset,
            "total_cost": self.total_cost,
            "feasible": self.feasible,
            "violations": self.violations,
        }


def unit_bounds(budget: int, unit_cost: int, min_share: float) -> tuple[int, int]:
    """Integer per-project bounds: floor for the cap, ceil for the floor so
    the investment floor is honored."""
    p_max = budget // unit_cost
    p_min = math.ceil(budget * min_share / unit_cost - 1e-9)
    return p_min, p_max


def _greedy_max_units(budget: int, caps: list[int], costs: list[int]) -> int:
    """Max extra units affordable: cheapest units first (exact, all units are
    worth one offset each)."""
    units = 0
    for cost, cap in sorted(zip(costs, caps)):
        take = min(cap, budget // cost)
        units += take
        budget -= take * cost
    return units


def _greedy_min_cost(units: int, caps: list[int], costs: list[int]) -> int | None:
    """Min cost of exactly `units` extra units, or None if unattainable."""
    total = 0
    for cost, cap in sorted(zip(costs, caps)):
        take = min(cap, units)
        total += take * cost
        units -= take
        if units == 0:
            return total
    return total if units == 0 else None


def _branch_and_bound(costs: list[int], caps: list[int], budget: int,
                      required_units: int | None) -> tuple[list[int], int, int]:
    """Lexicographically-smallest optimal extra allocation.

    Objective key, minimized: (-units, cost, allocation); budget is a hard cap.
    With required_units set (min_cost mode), units are fixed to that value and
    the key reduces to (cost, allocation).
    """
    n = len(costs)

    if required_units is None:
        best_units = _greedy_max_units(budget, caps, costs)
    else:
        best_units = required_units
    best_cost = _greedy_min_cost(best_units, caps, costs)
    if best_cost is None or best_cost > budget:
        raise InfeasibleError("target offset unattainable", [
            f"required {best_units} units exceed available capacity or budget"])

    best_alloc: list[int] | None = None
    alloc = [0] * n

    def dfs(i: int, spent: int, units: int) -> None:
        nonlocal best_alloc
        if i == n:
            if units == best_units and spent == best_cost:
                if best_alloc is None or alloc < best_alloc:
                    best_alloc = alloc.copy()
            return
        rest_caps = caps[i:]
        rest_costs = costs[i:]
        hi = min(caps[i], (budget - spent) // costs[i])
        for v in range(0, hi + 1):
            spent_v = spent + v * costs[i]
            units_v = units + v
            # bounds from the greedy relaxation (exact for unit-value items)
            max_more = _greedy_max_units(budget - spent_v, rest_caps[1:],
                                         rest_costs[1:])
            if units_v + max_more < best_units:
                continue
            need = best_units - units_v
            if need < 0:
                break  # overshoot can never improve the key
            min_more = _greedy_min_cost(need, rest_caps[1:], rest_costs[1:])
            if min_more is None or spent_v + min_more > best_cost:
                continue
            alloc[i] = v
            dfs(i + 1, spent_v, units_v)
            if best_alloc is not None:
                # ascending enumeration: the first completion reached through
                # the tight bounds is already the lexicographic optimum
                return

    dfs(0, 0, 0)
    assert best_alloc is not None
    return best_alloc, best_units, best_cost


def solve_max_offset(instance: OffsetInstance) -> OffsetPlan:
    """Exactly optimal plan: max total offset within budget, then min cost,
    then lexicographically smallest allocation by project order."""
    if instance.mode != MODE_MAX_OFFSET:
        raise SchemaError("instance mode is not max_offset")
    projects = instance.enabled_projects
    budget = instance.budget

    mins, maxs, violations = [], [], []
    for p in projects:
        p_min, p_max = unit_bounds(budget, p.unit_cost, p.min_share)
        if p_min > p_max:
            violations.append(
                f"project {p.name}: floor {p_min} exceeds cap {p_max}")
        mins.append(p_min)
        maxs.append(p_max)
    base_cost = sum(m * p.unit_cost for m, p in zip(mins, projects))
    if base_cost > budget:
        violations.append(
            f"share floors cost {base_cost} exceed budget {budget}")
    if violations:
        return OffsetPlan({p.name: 0 for p in projects}, 0, 0, False, violations)

    costs = [p.unit_cost for p in projects]
    caps = [mx - mn for mn, mx in zip(mins, maxs)]
    extra, extra_units, extra_cost = _branch_and_bound(
        costs, caps, budget - base_cost, None)

    alloc = {p.name: mn + e for p, mn, e in zip(projects, mins, extra)}
    return OffsetPlan(
        allocations=alloc,
        total_offset=sum(mins) + extra_units,
        total_cost=base_cost + extra_cost,
        feasible=True,
    )


def solve_min_cost(instance: OffsetInstance) -> OffsetPlan:
    """Exactly optimal plan: reach target_offset at minimal cost.

    Share floors are budget-relative and carry no meaning without a budget,
    so they do not constrain this mode.
    """
    if instance.mode != MODE_MIN_COST:
        raise SchemaError("instance mode is not min_cost")
    projects = instance.enabled_projects
    target = instance.target_offset

    if target == 0:
        return OffsetPlan({p.name: 0 for p in projects}, 0, 0, True)
    if not projects:
        return OffsetPlan({}, 0, 0, False,
                          ["no enabled projects to reach a positive target"])

    costs = [p.unit_cost for p in projects]
    caps = [target] * len(projects)
    budget = target * max(costs)  # generous hard cap; optimum is far below
    alloc_list, units, cost = _branch_and_bound(costs, caps, budget, target)
    alloc = {p.name: a for p, a in zip(projects, alloc_list)}
    return OffsetPlan(alloc, units, cost, True)


def solve(instance: OffsetInstance) -> OffsetPlan:
    if instance.mode == MODE_MAX_OFFSET:
        return solve_max_offset(instance)
    return solve_min_cost(instance)


def emissions_liability(horizon_bundles: list, planned_green_kwh: dict,
                        emission_factor: float) -> float:
    """Net liability in MTCO2e over the horizon.

    Each month contributes max(0, monthly_kwh - planned_green) * factor / 1000;
    a green surplus in one month never offsets another (clamped per month).
    """
    missing = [b["month"] if isinstance(b, dict) else b.month
               for b in horizon_bundles
               if (b["month"] if isinstance(b, dict) else b.month)
               not in planned_green_kwh]
    if missing:
        raise SchemaError(
            "planned green kWh missing for months: " + ", ".join(missing))
    total = 0.0
    for b in horizon_bundles:
        month = b["month"] if isinstance(b, dict) else b.month
        kwh = b["monthly_kwh"] if isinstance(b, dict) else b.monthly_kwh
        total += max(0.0, kwh - planned_green_kwh[month]) * emission_factor / 1000.0
    return total
