"""Exhaustive ground truth: scan all n^m allocations of an instance.

Decides whether an allocation satisfying a criterion exists, and computes
the tight optimal factor (max achievable for goods, min for chores) with
the witnessing allocation.  Enumeration follows the lexicographic order
of owner vectors (item-major, base-n counter) and all arithmetic is
exact.

The inner loop avoids rational reductions entirely: values and weights
are pre-scaled to integer coefficient pairs ``(a, b)`` encoding
``a + b*sqrt5`` (per-row scaling cancels inside every factor ratio), so a
full scan is plain integer arithmetic.  Work can be split across
processes by fixing the first item's owner; shard merging keeps the
lexicographically least optimum, so parallel and serial runs return
identical results.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from math import lcm
from multiprocessing import get_context
from typing import Optional, Sequence

from .corpus import case_info, get_case
from .exact import POS_INF, ExtendedValue, Value, ZERO
from .fairness import Criterion
from .model import CHORES, GOODS, Allocation, InputError, Instance, check_valid

DEFAULT_BUDGET = 10**7

_BIG = 1 << 60


class BudgetExceededError(RuntimeError):
    """The scan would need more allocations than the budget allows."""

    def __init__(self, required: int, budget: int):
        super().__init__(
            f"exhaustive scan needs {required} allocations, budget is {budget}"
        )
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class OracleResult:
    objective: str  # "exists" or "best-factor"
    criterion: Optional[Criterion]
    exists: Optional[bool]
    witness: Optional[Allocation]
    best_factor: Optional[ExtendedValue]
    argbest: Optional[Allocation]
    allocations_scanned: int


# -- integer-pair field helpers ---------------------------------------------


def _pair_mul(a, b, c, d):
    """(a + b r)(c + d r) with r = sqrt5, as a coefficient pair."""
    if b == 0:
        if d == 0:
            return a * c, 0
        return a * c, a * d
    if d == 0:
        return a * c, b * c
    return a * c + 5 * b * d, a * d + b * c


def _pair_sign(a, b):
    if b == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return 1 if b > 0 else -1
    if a > 0:
        if b > 0:
            return 1
        d = a * a - 5 * b * b
        return (d > 0) - (d < 0)
    if b < 0:
        return -1
    d = a * a - 5 * b * b
    return (d < 0) - (d > 0)


def _factor_cmp(f1, f2):
    """Compare factors (na, nb, da, db); a zero denominator means +inf."""
    n1a, n1b, d1a, d1b = f1
    n2a, n2b, d2a, d2b = f2
    inf1 = d1a == 0 and d1b == 0
    inf2 = d2a == 0 and d2b == 0
    if inf1 or inf2:
        return (not inf2) - (not inf1)
    la, lb = _pair_mul(n1a, n1b, d2a, d2b)
    ra, rb = _pair_mul(n2a, n2b, d1a, d1b)
    return _pair_sign(la - ra, lb - rb)


_INF_FACTOR = (1, 0, 0, 0)
_ZERO_FACTOR = (0, 0, 1, 0)


def _scaled_pairs(values: Sequence[Value]) -> list[tuple[int, int]]:
    dens = [1]
    for v in values:
        dens.append(v.rat.denominator)
        dens.append(v.surd.denominator)
    scale = lcm(*dens)
    return [
        (
            v.rat.numerator * (scale // v.rat.denominator),
            v.surd.numerator * (scale // v.surd.denominator),
        )
        for v in values
    ]


def _prepare(instance: Instance):
    n, m = instance.n, instance.m
    weights = _scaled_pairs(instance.weights)
    rows = [_scaled_pairs(instance.values[i]) for i in range(n)]
    ranks = []
    by_rank = []
    for i in range(n):
        row = instance.values[i]

        def cmp(g, h, row=row):
            c = row[g].compare(row[h])
            return c if c else (g - h)

        order = sorted(range(m), key=cmp_to_key(cmp))
        rank = [0] * m
        for r, g in enumerate(order):
            rank[g] = r
        ranks.append(tuple(rank))
        by_rank.append(tuple(order))
    return (
        instance.kind,
        n,
        m,
        tuple(weights),
        tuple(tuple(r) for r in rows),
        tuple(ranks),
        tuple(by_rank),
    )


# -- per-shard scans ---------------------------------------------------------


def _shard_exists(args):
    """Scan one shard for the first allocation satisfying the criterion.

    Returns (found, local_index, owners or None, leaves_in_shard).
    """
    prep, crit, first_owner = args
    kind, n, m, W, V, RANK, BY_RANK = prep
    sums_a = [[0] * n for _ in range(n)]
    sums_b = [[0] * n for _ in range(n)]
    minr = [[_BIG] * n for _ in range(n)]
    maxr = [[-1] * n for _ in range(n)]
    size = [0] * n
    goods = kind == GOODS
    counter = 0
    hit: list = []

    def leaf() -> bool:
        for i in range(n):
            sa = sums_a[i]
            sb = sums_b[i]
            wi_a, wi_b = W[i]
            if goods:
                own_a, own_b = sa[i], sb[i]
                for j in range(n):
                    if j == i or size[j] == 0:
                        continue
                    ra, rb = sa[j], sb[j]
                    if crit == "wefx":
                        gmin = BY_RANK[i][minr[i][j]]
                        va, vb = V[i][gmin]
                        ra -= va
                        rb -= vb
                    elif crit == "wef1":
                        gmax = BY_RANK[i][maxr[i][j]]
                        va, vb = V[i][gmax]
                        ra -= va
                        rb -= vb
                    if ra == 0 and rb == 0:
                        continue
                    wj_a, wj_b = W[j]
                    la, lb = _pair_mul(own_a, own_b, wj_a, wj_b)
                    xa, xb = _pair_mul(ra, rb, wi_a, wi_b)
                    if _pair_sign(la - xa, lb - xb) < 0:
                        return False
            else:
                if size[i] == 0:
                    continue
                na, nb = sa[i], sb[i]
                if crit == "xwef":
                    gmin = BY_RANK[i][minr[i][i]]
                    va, vb = V[i][gmin]
                    na -= va
                    nb -= vb
                elif crit == "1wef":
                    gmax = BY_RANK[i][maxr[i][i]]
                    va, vb = V[i][gmax]
                    na -= va
                    nb -= vb
                if na == 0 and nb == 0:
                    continue
                for j in range(n):
                    if j == i:
                        continue
                    wj_a, wj_b = W[j]
                    la, lb = _pair_mul(na, nb, wj_a, wj_b)
                    xa, xb = _pair_mul(sa[j], sb[j], wi_a, wi_b)
                    if _pair_sign(la - xa, lb - xb) > 0:
                        return False
        return True

    def push(g, o):
        undo = []
        for i in range(n):
            undo.append((sums_a[i][o], sums_b[i][o], minr[i][o], maxr[i][o]))
            va, vb = V[i][g]
            sums_a[i][o] += va
            sums_b[i][o] += vb
            r = RANK[i][g]
            if r < minr[i][o]:
                minr[i][o] = r
            if r > maxr[i][o]:
                maxr[i][o] = r
        size[o] += 1
        return undo

    def pop(g, o, undo):
        for i in range(n):
            sums_a[i][o], sums_b[i][o], minr[i][o], maxr[i][o] = undo[i]
        size[o] -= 1

    owners = [0] * m

    def rec(depth) -> bool:
        nonlocal counter
        if depth == m:
            counter += 1
            if leaf():
                hit.append(tuple(owners))
                return True
            return False
        for o in range(n):
            owners[depth] = o
            undo = push(depth, o)
            found = rec(depth + 1)
            pop(depth, o, undo)
            if found:
                return True
        return False

    owners[0] = first_owner
    undo0 = push(0, first_owner)
    found = rec(1)
    pop(0, first_owner, undo0)
    return (found, counter - 1 if found else counter, hit[0] if found else None)


def _shard_best(args):
    """Scan one shard for the extremal factor (max for goods, min for chores).

    Returns (factor_tuple, owners).  Ties keep the first (lexicographically
    least) allocation encountered.
    """
    prep, first_owner = args
    kind, n, m, W, V, RANK, BY_RANK = prep
    sums_a = [[0] * n for _ in range(n)]
    sums_b = [[0] * n for _ in range(n)]
    minr = [[_BIG] * n for _ in range(n)]
    size = [0] * n
    goods = kind == GOODS

    best: Optional[tuple] = None
    best_owners: Optional[tuple] = None

    def leaf_goods():
        nonlocal best, best_owners
        cur = _INF_FACTOR
        for i in range(n):
            sa = sums_a[i]
            sb = sums_b[i]
            wi = W[i]
            own_a, own_b = sa[i], sb[i]
            for j in range(n):
                if j == i or size[j] == 0:
                    continue
                gmin = BY_RANK[i][minr[i][j]]
                va, vb = V[i][gmin]
                ra = sa[j] - va
                rb = sb[j] - vb
                if ra == 0 and rb == 0:
                    continue
                na, nb = _pair_mul(own_a, own_b, *W[j])
                da, db = _pair_mul(ra, rb, *wi)
                cand = (na, nb, da, db)
                if _factor_cmp(cand, cur) < 0:
                    cur = cand
                    if best is not None and _factor_cmp(cur, best) <= 0:
                        return  # cannot strictly beat the incumbent
        if best is None or _factor_cmp(cur, best) > 0:
            best = cur
            best_owners = tuple(owners)

    def leaf_chores():
        nonlocal best, best_owners
        cur = _ZERO_FACTOR
        for i in range(n):
            if size[i] == 0:
                continue
            sa = sums_a[i]
            sb = sums_b[i]
            gmin = BY_RANK[i][minr[i][i]]
            va, vb = V[i][gmin]
            ea = sa[i] - va
            eb = sb[i] - vb
            if ea == 0 and eb == 0:
                continue
            wi = W[i]
            for j in range(n):
                if j == i:
                    continue
                na, nb = _pair_mul(ea, eb, *W[j])
                da, db = _pair_mul(sa[j], sb[j], *wi)
                cand = (na, nb, da, db)
                if _factor_cmp(cand, cur) > 0:
                    cur = cand
                    if best is not None and _factor_cmp(cur, best) >= 0:
                        return
        if best is None or _factor_cmp(cur, best) < 0:
            best = cur
            best_owners = tuple(owners)

    leaf = leaf_goods if goods else leaf_chores

    def push(g, o):
        undo = []
        for i in range(n):
            undo.append((sums_a[i][o], sums_b[i][o], minr[i][o]))
            va, vb = V[i][g]
            sums_a[i][o] += va
            sums_b[i][o] += vb
            r = RANK[i][g]
            if r < minr[i][o]:
                minr[i][o] = r
        size[o] += 1
        return undo

    def pop(g, o, undo):
        for i in range(n):
            sums_a[i][o], sums_b[i][o], minr[i][o] = undo[i]
        size[o] -= 1

    owners = [0] * m

    def rec(depth):
        if depth == m:
            leaf()
            return
        for o in range(n):
            owners[depth] = o
            undo = push(depth, o)
            rec(depth + 1)
            pop(depth, o, undo)

    owners[0] = first_owner
    undo0 = push(0, first_owner)
    rec(1)
    pop(0, first_owner, undo0)
    return best, best_owners


def _factor_to_extended(f) -> ExtendedValue:
    na, nb, da, db = f
    if da == 0 and db == 0:
        return POS_INF
    num = Value(Fraction(na), Fraction(nb))
    den = Value(Fraction(da), Fraction(db))
    return num / den


def _check_budget(instance: Instance, budget: int) -> int:
    total = instance.n**instance.m
    if total > budget:
        raise BudgetExceededError(total, budget)
    return total


def _run_shards(worker, shard_args, jobs: int):
    if jobs > 1 and len(shard_args) > 1:
        ctx = get_context()
        with ctx.Pool(processes=min(jobs, len(shard_args))) as pool:
            return pool.map(worker, shard_args)
    return [worker(a) for a in shard_args]


def exists_exact(
    instance: Instance,
    criterion: Criterion,
    *,
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
) -> OracleResult:
    """First allocation (in lexicographic owner order) satisfying the criterion.

    Scans all n^m total allocations; ``allocations_scanned`` counts the
    scan prefix up to the witness, or the full n^m when none exists.
    """
    check_valid(instance)
    if instance.kind not in criterion.compatible_kind():
        raise InputError(
            f"criterion {criterion.value} is incompatible with a {instance.kind} instance"
        )
    total = _check_budget(instance, budget)
    n, m = instance.n, instance.m
    if m == 0:
        empty = Allocation(n_agents=n, owners=())
        return OracleResult(
            objective="exists",
            criterion=criterion,
            exists=True,
            witness=empty,
            best_factor=None,
            argbest=None,
            allocations_scanned=1,
        )
    prep = _prepare(instance)
    shard_args = [(prep, criterion.value, d) for d in range(n)]
    block = n ** (m - 1)

    if jobs > 1:
        results = _run_shards(_shard_exists, shard_args, jobs)
    else:
        results = []
        for a in shard_args:
            res = _shard_exists(a)
            results.append(res)
            if res[0]:
                break

    for digit, (found, local, owners) in enumerate(results):
        if found:
            scanned = digit * block + local + 1
            return OracleResult(
                objective="exists",
                criterion=criterion,
                exists=True,
                witness=Allocation(n_agents=n, owners=owners),
                best_factor=None,
                argbest=None,
                allocations_scanned=scanned,
            )
    return OracleResult(
        objective="exists",
        criterion=criterion,
        exists=False,
        witness=None,
        best_factor=None,
        argbest=None,
        allocations_scanned=total,
    )


def best_factor(
    instance: Instance, *, budget: int = DEFAULT_BUDGET, jobs: int = 1
) -> OracleResult:
    """Extremal any-item factor over every allocation, with its witness.

    Goods: maximizes the WEFX factor.  Chores: minimizes the XWEF factor.
    Factor ties keep the lexicographically least owner vector.
    """
    check_valid(instance)
    total = _check_budget(instance, budget)
    n, m = instance.n, instance.m
    goods = instance.kind == GOODS
    if m == 0:
        empty = Allocation(n_agents=n, owners=())
        return OracleResult(
            objective="best-factor",
            criterion=None,
            exists=None,
            witness=None,
            best_factor=POS_INF if goods else ZERO,
            argbest=empty,
            allocations_scanned=1,
        )
    prep = _prepare(instance)
    shard_args = [(prep, d) for d in range(n)]
    results = _run_shards(_shard_best, shard_args, jobs)

    best = None
    best_owners = None
    for factor, owners in results:
        if factor is None:
            continue
        if best is None:
            best, best_owners = factor, owners
        elif goods and _factor_cmp(factor, best) > 0:
            best, best_owners = factor, owners
        elif not goods and _factor_cmp(factor, best) < 0:
            best, best_owners = factor, owners
    return OracleResult(
        objective="best-factor",
        criterion=None,
        exists=None,
        witness=None,
        best_factor=_factor_to_extended(best),
        argbest=Allocation(n_agents=n, owners=best_owners),
        allocations_scanned=total,
    )


def weight_sweep(
    case_id: str,
    grid: Sequence[Value],
    *,
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
) -> list[tuple[Value, ExtendedValue]]:
    """Best factor of a parameterized two-agent case at each weight split."""
    info = case_info(case_id)
    if not info.parameterized:
        raise InputError(f"case {case_id} is not parameterized by a weight split")
    out = []
    for alpha in grid:
        if alpha.sign() <= 0 or (Value(1) - alpha).sign() <= 0:
            raise InputError(f"grid point {alpha} outside (0,1)")
        instance = get_case(case_id, alpha=alpha)
        res = best_factor(instance, budget=budget, jobs=jobs)
        out.append((alpha, res.best_factor))
    return out
