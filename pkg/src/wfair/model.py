"""Problem instances and allocations.

An :class:`Instance` bundles the agents (with strictly positive weights),
the items, and the per-agent item values -- valuations for goods, costs
for chores.  An :class:`Allocation` is a total partition of the items,
stored as an owner index per item.  Both are immutable after construction;
the input ordering of agents and items is the canonical order used by
every lexicographic tie-break in this package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .exact import Value

GOODS = "goods"
CHORES = "chores"
KINDS = (GOODS, CHORES)


class InputError(ValueError):
    """Invalid instance, allocation or algorithm input."""


def _as_value(x) -> Value:
    if isinstance(x, Value):
        return x
    if isinstance(x, (int, Fraction, str)):
        return Value(x)
    raise InputError(f"cannot interpret {x!r} as a value")


@dataclass(frozen=True)
class Instance:
    """A weighted fair-division instance.

    ``values[i][g]`` is agent i's value (goods) or cost (chores) for item g.
    Use :func:`validate` to collect invariant violations.
    """

    kind: str
    agent_ids: tuple[str, ...]
    weights: tuple[Value, ...]
    item_ids: tuple[str, ...]
    values: tuple[tuple[Value, ...], ...]

    @property
    def n(self) -> int:
        return len(self.agent_ids)

    @property
    def m(self) -> int:
        return len(self.item_ids)

    @classmethod
    def build(
        cls,
        kind: str,
        agents: Sequence[tuple[str, object]],
        items: Sequence[str],
        rows: Sequence[Sequence[object]],
    ) -> "Instance":
        """Construct from (id, weight) pairs and value rows, coercing numbers."""
        return cls(
            kind=kind,
            agent_ids=tuple(a for a, _ in agents),
            weights=tuple(_as_value(w) for _, w in agents),
            item_ids=tuple(items),
            values=tuple(tuple(_as_value(v) for v in row) for row in rows),
        )

    def total_value(self, agent: int) -> Value:
        total = Value(0)
        for v in self.values[agent]:
            total = total + v
        return total


def validate(instance: Instance) -> list[str]:
    """Return every invariant violation; an empty list means the instance is valid."""
    violations: list[str] = []
    if instance.kind not in KINDS:
        violations.append(f"unknown kind: {instance.kind!r}")
    n = len(instance.agent_ids)
    if len(instance.weights) != n:
        violations.append("dimension mismatch: weights vs agents")
    seen: set[str] = set()
    for aid in instance.agent_ids:
        if aid in seen:
            violations.append(f"duplicate agent id: {aid}")
        seen.add(aid)
    seen = set()
    for iid in instance.item_ids:
        if iid in seen:
            violations.append(f"duplicate item id: {iid}")
        seen.add(iid)
    for idx, w in enumerate(instance.weights[:n]):
        if w.sign() <= 0:
            violations.append(f"non-positive weight: agent {instance.agent_ids[idx]}")
    if len(instance.values) != n:
        violations.append(
            f"dimension mismatch: {len(instance.values)} value rows for {n} agents"
        )
    m = len(instance.item_ids)
    for idx, row in enumerate(instance.values):
        if len(row) != m:
            violations.append(
                f"dimension mismatch: row {idx} has {len(row)} entries for {m} items"
            )
        for jdx, v in enumerate(row):
            if v.sign() < 0:
                violations.append(
                    f"negative value: agent index {idx}, item index {jdx}"
                )
    return violations


def check_valid(instance: Instance) -> None:
    violations = validate(instance)
    if violations:
        raise InputError("; ".join(violations))


@dataclass(frozen=True)
class Allocation:
    """A total partition of items: ``owners[g]`` is the agent index owning item g."""

    n_agents: int
    owners: tuple[int, ...]

    def __post_init__(self):
        for o in self.owners:
            if not 0 <= o < self.n_agents:
                raise InputError(f"owner index out of range: {o}")

    @classmethod
    def from_bundles(cls, bundles: Sequence[Iterable[int]], n_items: int) -> "Allocation":
        owners = [-1] * n_items
        for agent, bundle in enumerate(bundles):
            for g in bundle:
                if owners[g] != -1:
                    raise InputError(f"item index {g} assigned twice")
                owners[g] = agent
        if any(o == -1 for o in owners):
            missing = [g for g, o in enumerate(owners) if o == -1]
            raise InputError(f"items without an owner: {missing}")
        return cls(n_agents=len(bundles), owners=tuple(owners))

    def bundles(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n_agents)]
        for g, o in enumerate(self.owners):
            out[o].append(g)
        return tuple(tuple(b) for b in out)


def check_allocation(instance: Instance, allocation: Allocation) -> None:
    if allocation.n_agents != instance.n:
        raise InputError(
            f"allocation has {allocation.n_agents} agents, instance has {instance.n}"
        )
    if len(allocation.owners) != instance.m:
        raise InputError(
            f"allocation covers {len(allocation.owners)} items, instance has {instance.m}"
        )


def bundle_value(
    instance: Instance, allocation: Allocation, evaluator: int, bundle: int
) -> Value:
    """Additive value of agent ``bundle``'s items through ``evaluator``'s eyes."""
    if not 0 <= evaluator < instance.n or not 0 <= bundle < instance.n:
        raise IndexError("agent index out of range")
    check_allocation(instance, allocation)
    row = instance.values[evaluator]
    total = Value(0)
    for g, o in enumerate(allocation.owners):
        if o == bundle:
            total = total + row[g]
    return total


def normalize_values(instance: Instance) -> Instance:
    """Rescale each agent's row so it sums to exactly 1; weights untouched."""
    new_rows = []
    for idx, row in enumerate(instance.values):
        total = instance.total_value(idx)
        if total.sign() <= 0:
            raise InputError(
                f"agent {instance.agent_ids[idx]} has zero total value"
            )
        new_rows.append(tuple(v / total for v in row))
    return Instance(
        kind=instance.kind,
        agent_ids=instance.agent_ids,
        weights=instance.weights,
        item_ids=instance.item_ids,
        values=tuple(new_rows),
    )
