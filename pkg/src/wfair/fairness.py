"""Exact verification of weighted envy-freeness criteria and tight factors.

For goods, agent i compares its own weighted bundle value against agent
j's, optionally after removing one item from j's bundle:

* WEF   --  v_i(A_i)/w_i >= v_i(A_j)/w_j
* WEF1  --  v_i(A_i)/w_i >= min over a in A_j of v_i(A_j - a)/w_j
* WEFX  --  v_i(A_i)/w_i >= max over a in A_j of v_i(A_j - a)/w_j

For chores the removal happens in agent i's own bundle:

* WEF   --  c_i(B_i)/w_i <= c_i(B_j)/w_j
* 1WEF  --  min over b in B_i of c_i(B_i - b)/w_i <= c_i(B_j)/w_j
* XWEF  --  max over b in B_i of c_i(B_i - b)/w_i <= c_i(B_j)/w_j

Tight multiplicative factors are reported unclamped: for goods the factor
is the smallest pair ratio (the allocation is alpha-WEFX exactly for
alpha <= min(factor, 1)); for chores the largest (beta-XWEF exactly for
beta >= factor).  Pairs whose relaxed comparison is vacuous contribute
positive infinity for goods and zero for chores.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .exact import POS_INF, ExtendedValue, Value, ZERO
from .model import (
    CHORES,
    GOODS,
    Allocation,
    InputError,
    Instance,
    check_allocation,
    check_valid,
)


class Criterion(enum.Enum):
    WEF = "wef"
    WEF1 = "wef1"
    WEFX = "wefx"
    ONE_WEF = "1wef"
    XWEF = "xwef"

    @classmethod
    def from_text(cls, text: str) -> "Criterion":
        for c in cls:
            if c.value == text.lower():
                return c
        raise InputError(f"unknown criterion: {text!r}")

    def compatible_kind(self) -> tuple[str, ...]:
        if self in (Criterion.WEF1, Criterion.WEFX):
            return (GOODS,)
        if self in (Criterion.ONE_WEF, Criterion.XWEF):
            return (CHORES,)
        return (GOODS, CHORES)


@dataclass(frozen=True)
class PairDetail:
    """Verdict for one ordered pair (i, j): its factor and the binding removal."""

    i: int
    j: int
    factor: ExtendedValue
    removed_item: Optional[int]
    satisfied: bool


@dataclass(frozen=True)
class FairnessReport:
    criterion: Criterion
    satisfied: bool
    factor: ExtendedValue
    worst_pair: Optional[tuple[int, int]]
    pairs: tuple[PairDetail, ...]

    def to_json(self, instance: Instance) -> dict:
        def factor_fields(f: ExtendedValue) -> dict:
            return {
                "factor_exact": f.render_exact(),
                "factor_decimal": f.render_decimal(6),
            }

        out: dict = {"criterion": self.criterion.value, "satisfied": self.satisfied}
        out.update(factor_fields(self.factor))
        out["worst_pair"] = (
            None
            if self.worst_pair is None
            else [instance.agent_ids[self.worst_pair[0]], instance.agent_ids[self.worst_pair[1]]]
        )
        out["pairs"] = [
            {
                "i": instance.agent_ids[p.i],
                "j": instance.agent_ids[p.j],
                **factor_fields(p.factor),
                "removed_item": (
                    None if p.removed_item is None else instance.item_ids[p.removed_item]
                ),
                "satisfied": p.satisfied,
            }
            for p in self.pairs
        ]
        return out


def _bundle_sums(instance: Instance, bundles) -> list[list[Value]]:
    """sums[i][j] = value of bundle j under evaluator i."""
    n = instance.n
    sums = [[ZERO for _ in range(n)] for _ in range(n)]
    for i in range(n):
        row = instance.values[i]
        for j in range(n):
            total = ZERO
            for g in bundles[j]:
                total = total + row[g]
            sums[i][j] = total
    return sums


def _extreme_item(row, bundle, want_min: bool) -> Optional[int]:
    """Index of the (lex-first) min- or max-valued item of a bundle under row."""
    best = None
    for g in bundle:
        if best is None:
            best = g
            continue
        c = row[g].compare(row[best])
        if (want_min and c < 0) or (not want_min and c > 0):
            best = g
    return best


def _pair_detail(
    instance: Instance,
    bundles,
    sums,
    i: int,
    j: int,
    criterion: Criterion,
) -> PairDetail:
    w = instance.weights
    row = instance.values[i]
    if instance.kind == GOODS:
        own = sums[i][i]
        removed = None
        if criterion == Criterion.WEF:
            rem = sums[i][j]
        else:
            if not bundles[j]:
                return PairDetail(i, j, POS_INF, None, True)
            # WEFX removes the least valuable item (worst case for i);
            # WEF1 removes the most valuable one (best case for i).
            removed = _extreme_item(row, bundles[j], want_min=criterion == Criterion.WEFX)
            rem = sums[i][j] - row[removed]
        satisfied = (own * w[j]).compare(rem * w[i]) >= 0
        if rem.sign() == 0:
            return PairDetail(i, j, POS_INF, removed, satisfied)
        factor = (own * w[j]) / (rem * w[i])
        return PairDetail(i, j, factor, removed, satisfied)

    # chores: removal happens in the evaluator's own bundle
    removed = None
    if criterion == Criterion.WEF:
        num = sums[i][i]
    else:
        if not bundles[i]:
            return PairDetail(i, j, ZERO, None, True)
        removed = _extreme_item(row, bundles[i], want_min=criterion == Criterion.XWEF)
        num = sums[i][i] - row[removed]
    den = sums[i][j]
    satisfied = (num * w[j]).compare(den * w[i]) <= 0
    if num.sign() == 0:
        return PairDetail(i, j, ZERO, removed, True)
    if den.sign() == 0:
        return PairDetail(i, j, POS_INF, removed, satisfied)
    factor = (num * w[j]) / (den * w[i])
    return PairDetail(i, j, factor, removed, satisfied)


def _report(instance: Instance, allocation: Allocation, criterion: Criterion) -> FairnessReport:
    bundles = allocation.bundles()
    sums = _bundle_sums(instance, bundles)
    pairs = []
    for i in range(instance.n):
        for j in range(instance.n):
            if i != j:
                pairs.append(_pair_detail(instance, bundles, sums, i, j, criterion))
    goods = instance.kind == GOODS
    factor: ExtendedValue = POS_INF if goods else ZERO
    for p in pairs:
        if goods:
            if p.factor is POS_INF:
                continue
            if factor is POS_INF or p.factor < factor:
                factor = p.factor
        else:
            if p.factor is POS_INF:
                factor = POS_INF
            elif factor is not POS_INF and p.factor > factor:
                factor = p.factor
    if goods:
        vacuous_overall = factor is POS_INF
    else:
        vacuous_overall = isinstance(factor, Value) and factor.sign() == 0
    worst = None
    if not vacuous_overall:
        for p in pairs:
            if p.factor is factor or (
                isinstance(p.factor, Value)
                and isinstance(factor, Value)
                and p.factor == factor
            ):
                worst = (p.i, p.j)
                break
    return FairnessReport(
        criterion=criterion,
        satisfied=all(p.satisfied for p in pairs),
        factor=factor,
        worst_pair=worst,
        pairs=tuple(pairs),
    )


def verify(instance: Instance, allocation: Allocation, criterion: Criterion) -> FairnessReport:
    """Evaluate a criterion exactly over every ordered agent pair."""
    check_valid(instance)
    check_allocation(instance, allocation)
    if instance.kind not in criterion.compatible_kind():
        raise InputError(
            f"criterion {criterion.value} is incompatible with a {instance.kind} instance"
        )
    return _report(instance, allocation, criterion)


def wefx_factor(instance: Instance, allocation: Allocation) -> ExtendedValue:
    """Tight alpha: the smallest pair ratio under any-good removal (goods only)."""
    if instance.kind != GOODS:
        raise InputError("wefx_factor requires a goods instance")
    return verify(instance, allocation, Criterion.WEFX).factor


def xwef_factor(instance: Instance, allocation: Allocation) -> ExtendedValue:
    """Tight beta: the largest pair ratio under any-chore removal (chores only)."""
    if instance.kind != CHORES:
        raise InputError("xwef_factor requires a chores instance")
    return verify(instance, allocation, Criterion.XWEF).factor


def satisfies_wefx_at(instance: Instance, allocation: Allocation, alpha: Value) -> bool:
    """Check the relaxed pairwise inequality with an explicit factor alpha."""
    factor = wefx_factor(instance, allocation)
    if factor is POS_INF:
        return True
    return factor.compare(alpha) >= 0


def satisfies_xwef_at(instance: Instance, allocation: Allocation, beta: Value) -> bool:
    factor = xwef_factor(instance, allocation)
    if factor is POS_INF:
        return False
    return factor.compare(beta) <= 0


def bundles_satisfy(instance: Instance, bundles, criterion: Criterion) -> bool:
    """Criterion check on explicit (possibly partial) bundles of item indices."""
    sums = _bundle_sums(instance, bundles)
    for i in range(instance.n):
        for j in range(instance.n):
            if i == j:
                continue
            if not _pair_detail(instance, bundles, sums, i, j, criterion).satisfied:
                return False
    return True
