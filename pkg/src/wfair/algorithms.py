"""Allocation procedures with runtime checks of their fairness guarantees.

Four procedures are provided:

* :func:`envy_cycle_weighted` -- weighted envy-cycle elimination for goods
  when agents share cardinal or ordinal preferences (WEFX output);
* :func:`icyc_integer_wefx` -- an I-cut-you-choose variant for two agents
  with weights (1, W), W a positive integer (WEFX output);
* :func:`approx_wefx` -- a moving-knife-style procedure for two agents
  with normalized weights, guaranteeing a w/(2*cbrt(m)) fraction of WEFX;
* :func:`chore_round_robin` -- a weight-dependent picking sequence for
  chores, any number of agents (1WEF output).

Each procedure verifies its guarantee on the allocation it is about to
return.  A failed guarantee raises :class:`GuaranteeViolation` carrying
the full instance and run state: such a failure would be a genuine
counterexample to the underlying analysis, never something to swallow.

All argmin/argmax tie-breaks are lexicographic by input index, so every
procedure is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Mapping, Optional, Sequence

from .exact import ONE, POS_INF, Value, ZERO, ExtendedValue
from .fairness import Criterion, bundles_satisfy, verify, wefx_factor
from .model import (
    CHORES,
    GOODS,
    Allocation,
    InputError,
    Instance,
    check_valid,
    normalize_values,
)

MODE_IDENTICAL_CARDINAL = "identical_cardinal"
MODE_IDENTICAL_ORDINAL = "identical_ordinal"


class GuaranteeViolation(RuntimeError):
    """A procedure's proven guarantee failed at runtime.

    Carries enough state to reproduce: treat as a headline event, not a
    recoverable error.
    """

    def __init__(self, message: str, instance: Instance, details: Optional[dict] = None):
        super().__init__(message)
        self.message = message
        self.instance = instance
        self.details = details or {}


# ---------------------------------------------------------------------------
# weighted envy graph and envy-cycle elimination


def envy_graph(instance: Instance, owners: Mapping[int, int]) -> dict[int, tuple[int, ...]]:
    """Adjacency of the weighted envy graph for a (possibly partial) owner map.

    Edge i -> j exactly when v_i(A_i)/w_i < v_i(A_j)/w_j, compared exactly.
    """
    n = instance.n
    bundles: list[list[int]] = [[] for _ in range(n)]
    for g, o in owners.items():
        if not 0 <= g < instance.m or not 0 <= o < n:
            raise InputError(f"owner map entry out of range: {g} -> {o}")
        bundles[o].append(g)
    edges = _envy_edges(instance, bundles)
    return {
        i: tuple(j for j in range(n) if edges[i][j]) for i in range(n)
    }


def _envy_edges(instance: Instance, bundles) -> list[list[bool]]:
    n = instance.n
    w = instance.weights
    sums = []
    for i in range(n):
        row = instance.values[i]
        per = []
        for j in range(n):
            total = ZERO
            for g in bundles[j]:
                total = total + row[g]
            per.append(total)
        sums.append(per)
    edges = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j and (sums[i][i] * w[j]).compare(sums[i][j] * w[i]) < 0:
                edges[i][j] = True
    return edges


def _sigma_order(instance: Instance) -> list[int]:
    """Common item order: agent 1's values descending, index ascending on ties."""
    row = instance.values[0]

    def cmp(g: int, h: int) -> int:
        c = row[h].compare(row[g])
        return c if c else (g - h)

    return sorted(range(instance.m), key=cmp_to_key(cmp))


def _check_mode(instance: Instance, mode: str, order: Sequence[int]) -> None:
    if mode == MODE_IDENTICAL_CARDINAL:
        first = instance.values[0]
        for i in range(1, instance.n):
            if any(instance.values[i][g] != first[g] for g in range(instance.m)):
                raise InputError(
                    f"mode {mode} requires identical value rows; agent "
                    f"{instance.agent_ids[i]} differs"
                )
        return
    if mode == MODE_IDENTICAL_ORDINAL:
        for i in range(instance.n):
            row = instance.values[i]
            for a, b in zip(order, order[1:]):
                if row[a].compare(row[b]) < 0:
                    raise InputError(
                        f"mode {mode} requires a common ordinal preference; agent "
                        f"{instance.agent_ids[i]} increases along the common order"
                    )
        return
    raise InputError(f"unknown mode: {mode!r}")


def _find_envy_cycle(edges: list[list[bool]]) -> list[int]:
    """Some envy cycle, found by walking enviers backwards from agent 0.

    Only called when no source exists, i.e. every agent is envied.  The
    returned list ``cyc`` satisfies: cyc[s+1] envies cyc[s], and cyc[0]
    envies cyc[-1].
    """
    n = len(edges)

    def prev(j: int) -> int:
        for i in range(n):
            if edges[i][j]:
                return i
        raise AssertionError("no envier found while decycling")

    pos: dict[int, int] = {}
    walk: list[int] = []
    x = 0
    while x not in pos:
        pos[x] = len(walk)
        walk.append(x)
        x = prev(x)
    return walk[pos[x]:]


def _run_envy_cycle(
    instance: Instance, mode: str, strict: bool
) -> tuple[Allocation, list[tuple[int, ...]]]:
    n, m = instance.n, instance.m
    w = instance.weights
    order = _sigma_order(instance)
    if strict:
        _check_mode(instance, mode, order)
    bundles: list[list[int]] = [[] for _ in range(n)]
    rotations: list[tuple[int, ...]] = []

    for g in order:
        while True:
            edges = _envy_edges(instance, bundles)
            envied = [any(edges[i][j] for i in range(n)) for j in range(n)]
            sources = [j for j in range(n) if not envied[j]]
            if sources:
                break
            cyc = _find_envy_cycle(edges)
            if strict and mode == MODE_IDENTICAL_CARDINAL:
                raise GuaranteeViolation(
                    "envy cycle arose under identical cardinal values",
                    instance,
                    {"bundles": [list(b) for b in bundles], "cycle": list(cyc)},
                )
            old = [list(b) for b in bundles]
            min_weight_members = _min_weight_members(w, cyc)
            # each member takes the bundle of the agent it envies
            for s in range(len(cyc) - 1):
                bundles[cyc[s + 1]] = list(old[cyc[s]])
            bundles[cyc[0]] = list(old[cyc[-1]])
            rotations.append(tuple(cyc))
            if strict:
                for i in min_weight_members:
                    before = _bundle_total(instance.values[i], old[i])
                    after = _bundle_total(instance.values[i], bundles[i])
                    if after.compare(before) <= 0:
                        raise GuaranteeViolation(
                            "cycle rotation failed to improve a minimum-weight member",
                            instance,
                            {
                                "cycle": list(cyc),
                                "agent": instance.agent_ids[i],
                                "before": before.render_exact(),
                                "after": after.render_exact(),
                            },
                        )
        # give the item to the poorest source (weighted, lex tie-break)
        pick = sources[0]
        pick_total = _bundle_total(instance.values[pick], bundles[pick])
        for j in sources[1:]:
            jt = _bundle_total(instance.values[j], bundles[j])
            if (jt * w[pick]).compare(pick_total * w[j]) < 0:
                pick, pick_total = j, jt
        bundles[pick].append(g)
        if strict and not bundles_satisfy(instance, bundles, Criterion.WEFX):
            raise GuaranteeViolation(
                "partial allocation lost the any-good fairness invariant",
                instance,
                {"bundles": [list(b) for b in bundles], "item": instance.item_ids[g]},
            )

    allocation = Allocation.from_bundles(bundles, m)
    if strict and not verify(instance, allocation, Criterion.WEFX).satisfied:
        raise GuaranteeViolation(
            "final allocation is not WEFX", instance, {"owners": list(allocation.owners)}
        )
    return allocation, rotations


def _min_weight_members(weights, cyc) -> list[int]:
    best = [cyc[0]]
    for i in cyc[1:]:
        c = weights[i].compare(weights[best[0]])
        if c < 0:
            best = [i]
        elif c == 0:
            best.append(i)
    return best


def _bundle_total(row, bundle) -> Value:
    total = ZERO
    for g in bundle:
        total = total + row[g]
    return total


def envy_cycle_weighted(instance: Instance, mode: str, *, strict: bool = True) -> Allocation:
    """Weighted envy-cycle elimination for goods with shared preferences.

    Items are handed out along the common descending order, each round to
    an unenvied agent (the one with the smallest weighted own-bundle value,
    lexicographic tie-break).  When every agent is envied, bundles rotate
    along an envy cycle until a source appears.  With ``strict`` (the
    default) the mode precondition is checked, the any-good invariant is
    asserted every round, and the final allocation is verified WEFX.

    ``strict=False`` runs the machinery on arbitrary valuations with no
    checks; output then carries no fairness guarantee (this is how the
    known WEF1 failure of the procedure on general valuations is
    reproduced in the test suite).
    """
    check_valid(instance)
    if instance.kind != GOODS:
        raise InputError("envy_cycle_weighted requires a goods instance")
    allocation, _ = _run_envy_cycle(instance, mode, strict)
    return allocation


# ---------------------------------------------------------------------------
# integer-weight I-cut-you-choose


def greedy_balanced_partition(values: Sequence[Value], bundle_count: int) -> list[list[int]]:
    """Split items into ``bundle_count`` bundles, largest first onto the lightest.

    Items are processed in descending value order (index ascending on ties)
    and each goes to the currently smallest bundle (lowest index on ties).
    The resulting bundles satisfy: whenever one bundle is worth less than
    another, it is still worth at least the other minus any single item.
    """
    if bundle_count < 1:
        raise InputError("bundle_count must be >= 1")

    def cmp(g: int, h: int) -> int:
        c = values[h].compare(values[g])
        return c if c else (g - h)

    bundles: list[list[int]] = [[] for _ in range(bundle_count)]
    sums = [ZERO] * bundle_count
    for g in sorted(range(len(values)), key=cmp_to_key(cmp)):
        k = 0
        for idx in range(1, bundle_count):
            if sums[idx].compare(sums[k]) < 0:
                k = idx
        bundles[k].append(g)
        sums[k] = sums[k] + values[g]
    return bundles


def icyc_integer_wefx(instance: Instance) -> Allocation:
    """I-cut-you-choose for two agents with weights (1, W), W a positive integer.

    With at most W items the first agent takes a single best good.
    Otherwise the second agent greedily splits everything into W+1 balanced
    bundles (by its own values); the first agent takes its favorite bundle
    and the second keeps the rest.  The output is verified WEFX.
    """
    check_valid(instance)
    if instance.kind != GOODS:
        raise InputError("icyc_integer_wefx requires a goods instance")
    if instance.n != 2:
        raise InputError(f"icyc_integer_wefx requires exactly 2 agents, got {instance.n}")
    if instance.weights[0] != ONE:
        raise InputError("first agent's weight must be exactly 1")
    w2 = instance.weights[1]
    if not w2.is_integer or w2.sign() <= 0:
        raise InputError(f"second agent's weight must be a positive integer, got {w2}")
    big_w = int(w2.rat.numerator)

    m = instance.m
    v1, v2 = instance.values[0], instance.values[1]
    if m == 0:
        return Allocation(n_agents=2, owners=())

    if m <= big_w:
        best = 0
        for g in range(1, m):
            if v1[g].compare(v1[best]) > 0:
                best = g
        owners = tuple(0 if g == best else 1 for g in range(m))
    else:
        parts = greedy_balanced_partition(v2, big_w + 1)
        part_sums = [_bundle_total(v1, p) for p in parts]
        pick = 0
        for idx in range(1, len(parts)):
            if part_sums[idx].compare(part_sums[pick]) > 0:
                pick = idx
        chosen = set(parts[pick])
        owners = tuple(0 if g in chosen else 1 for g in range(m))

    allocation = Allocation(n_agents=2, owners=owners)
    report = verify(instance, allocation, Criterion.WEFX)
    if not report.satisfied:
        raise GuaranteeViolation(
            "integer-weight procedure produced a non-WEFX allocation",
            instance,
            {"owners": list(owners), "W": big_w},
        )
    return allocation


# ---------------------------------------------------------------------------
# approximate WEFX for two agents


@dataclass(frozen=True)
class CaseCheck:
    """One candidate allocation of the approximation procedure.

    When the case fails its factor test, ``lhs``/``rhs`` record the two
    sides of the inequality ``lhs < alpha * rhs`` that failure forces,
    and ``holds`` whether it does hold (checked via cubes, exactly).
    """

    case: str
    factor: ExtendedValue
    passed: bool
    lhs: Optional[Value] = None
    rhs: Optional[Value] = None
    holds: Optional[bool] = None


@dataclass(frozen=True)
class ApproxTrace:
    chosen_case: str
    k: int
    beta: Value
    alpha_cubed: Value  # alpha = w/(2*cbrt(m)) stored as the exact cube w^3/(8m)
    lead_weight: Value
    item_count: int
    reindexed: bool
    cases: tuple[CaseCheck, ...]


def _passes_alpha(factor: ExtendedValue, w: Value, m: int) -> bool:
    # factor >= w/(2*cbrt(m))  <=>  8m * factor^3 >= w^3 (cube is monotone)
    if factor is POS_INF:
        return True
    return (factor**3 * (8 * m)).compare(w**3) >= 0


def _lemma_holds(lhs: Value, rhs: Value, w: Value, m: int) -> bool:
    # lhs < alpha * rhs  <=>  8m * lhs^3 < w^3 * rhs^3
    return (lhs**3 * (8 * m)).compare(w**3 * rhs**3) < 0


def approx_wefx(instance: Instance) -> tuple[Allocation, ApproxTrace]:
    """Approximately WEFX allocation for two agents, factor w/(2*cbrt(m)).

    Values are normalized to row sums of 1 and split by pointwise
    comparison; the agent whose preferred split reaches its (normalized)
    weight leads.  Its split set is sorted descending and a prefix
    threshold k is located; four candidate allocations are then tried in
    order -- the single best good, the prefix below the weight, the prefix
    just above it, and finally moving the other agent's favorite good
    across -- returning the first that clears the factor
    ``alpha = w/(2*cbrt(m))``, compared exactly through cubes.  Each
    failed case is required to force its known inequality; a failure of
    those, or of all four cases, raises :class:`GuaranteeViolation`.
    """
    check_valid(instance)
    if instance.kind != GOODS:
        raise InputError("approx_wefx requires a goods instance")
    if instance.n != 2:
        raise InputError(f"approx_wefx requires exactly 2 agents, got {instance.n}")
    m = instance.m
    norm = normalize_values(instance)  # raises InputError on a zero-total agent

    wsum = instance.weights[0] + instance.weights[1]
    nweights = (instance.weights[0] / wsum, instance.weights[1] / wsum)

    split0 = [g for g in range(m) if norm.values[0][g].compare(norm.values[1][g]) >= 0]
    in_split0 = set(split0)
    split1 = [g for g in range(m) if g not in in_split0]
    v0_s0 = _bundle_total(norm.values[0], split0)

    if v0_s0.compare(nweights[0]) >= 0:
        lead, other = 0, 1
        work = split0
    else:
        lead, other = 1, 0
        work = split1
    reindexed = lead == 1
    w = nweights[lead]
    vlead = norm.values[lead]
    vother = norm.values[other]

    if not work or _bundle_total(vlead, work).compare(w) < 0:
        raise GuaranteeViolation(
            "no agent's preferred split reaches its weight", instance, {"split": split0}
        )

    def cmp_desc(g: int, h: int) -> int:
        c = vlead[h].compare(vlead[g])
        return c if c else (g - h)

    work = sorted(work, key=cmp_to_key(cmp_desc))

    # largest k with the (k-1)-prefix within the lead weight, capped at |work|;
    # prefixes are monotone (values >= 0), so scan until the first overshoot
    p = 0
    prefix = ZERO
    while p < len(work):
        nxt = prefix + vlead[work[p]]
        if nxt.compare(w) > 0:
            break
        prefix = nxt
        p += 1
    k = min(p + 1, len(work))
    beta = w - _bundle_total(vlead, work[: k - 1])

    if beta.sign() < 0 or (k >= 2 and (beta * (k - 1)).compare(w) >= 0):
        raise GuaranteeViolation(
            "prefix threshold bound failed",
            instance,
            {"k": k, "beta": beta.render_exact(), "w": w.render_exact()},
        )

    alpha_cubed = w**3 / Value(8 * m)
    one_minus_w = ONE - w

    def build(lead_bundle: list[int]) -> Allocation:
        chosen = set(lead_bundle)
        owners = tuple(lead if g in chosen else other for g in range(m))
        return Allocation(n_agents=2, owners=owners)

    best_other = None
    for g in work:
        if best_other is None or vother[g].compare(vother[best_other]) > 0:
            best_other = g

    candidates = [
        ("I", build([work[0]])),
        ("II", build(work[: k - 1])),
        ("III", build(work[:k])),
        ("IV", build([g for g in range(m) if g != best_other])),
    ]

    def lemma_sides(case: str) -> tuple[Value, Value]:
        if case == "I":
            return ONE / Value(k), (ONE - w / Value(k)) / one_minus_w
        if case == "II":
            return (w - beta) / w, (one_minus_w + beta) / one_minus_w
        if case == "III":
            if k < 2:
                raise GuaranteeViolation(
                    "reached the over-prefix case with k = 1", instance, {"k": k}
                )
            return (
                (one_minus_w - w / Value(k - 1) + beta) / one_minus_w,
                (w - beta) / w,
            )
        return (w / Value(k)) / one_minus_w, (ONE - w / Value(k)) / w

    checks: list[CaseCheck] = []
    for case, allocation in candidates:
        factor = wefx_factor(instance, allocation)
        if _passes_alpha(factor, w, m):
            checks.append(CaseCheck(case=case, factor=factor, passed=True))
            trace = ApproxTrace(
                chosen_case=case,
                k=k,
                beta=beta,
                alpha_cubed=alpha_cubed,
                lead_weight=w,
                item_count=m,
                reindexed=reindexed,
                cases=tuple(checks),
            )
            return allocation, trace
        lhs, rhs = lemma_sides(case)
        holds = _lemma_holds(lhs, rhs, w, m)
        checks.append(
            CaseCheck(case=case, factor=factor, passed=False, lhs=lhs, rhs=rhs, holds=holds)
        )
        if not holds:
            raise GuaranteeViolation(
                f"case {case} failed without forcing its inequality",
                instance,
                {
                    "case": case,
                    "lhs": lhs.render_exact(),
                    "rhs": rhs.render_exact(),
                    "w": w.render_exact(),
                    "m": m,
                },
            )

    raise GuaranteeViolation(
        "all four candidate allocations fell below the guaranteed factor",
        instance,
        {"cases": [c.case for c in checks], "w": w.render_exact(), "m": m},
    )


# ---------------------------------------------------------------------------
# chore round-robin


@dataclass(frozen=True)
class Pick:
    iteration: int
    agent: int
    chore: int
    t_before: int


@dataclass(frozen=True)
class PickTrace:
    """While-phase picks in order, then the final-pass picks per agent."""

    picks: tuple[Pick, ...]
    final_picks: tuple[tuple[int, int], ...]


def chore_round_robin(instance: Instance) -> tuple[Allocation, PickTrace]:
    """Weight-dependent picking sequence for chores; output verified 1WEF.

    While more than n chores remain, the agent minimizing t_i/w_i picks its
    cheapest remaining chore (both tie-broken lexicographically) and its
    counter t_i (starting at 1) increments.  A final pass in agent order
    hands each agent one more cheapest chore until none remain.
    """
    check_valid(instance)
    if instance.kind != CHORES:
        raise InputError("chore_round_robin requires a chores instance")
    n, l = instance.n, instance.m
    w = instance.weights

    def cmp_cost(row):
        def cmp(g: int, h: int) -> int:
            c = row[g].compare(row[h])
            return c if c else (g - h)

        return cmp

    order = [sorted(range(l), key=cmp_to_key(cmp_cost(instance.values[i]))) for i in range(n)]
    ptr = [0] * n
    taken = [False] * l
    t = [1] * n
    bundles: list[list[int]] = [[] for _ in range(n)]
    picks: list[Pick] = []
    remaining = l
    iteration = 0

    def next_chore(agent: int) -> int:
        while taken[order[agent][ptr[agent]]]:
            ptr[agent] += 1
        return order[agent][ptr[agent]]

    while remaining > n:
        iteration += 1
        best = 0
        for i in range(1, n):
            # t_i/w_i < t_best/w_best  <=>  t_i * w_best < t_best * w_i
            if (w[best] * t[i]).compare(w[i] * t[best]) < 0:
                best = i
        g = next_chore(best)
        taken[g] = True
        bundles[best].append(g)
        picks.append(Pick(iteration=iteration, agent=best, chore=g, t_before=t[best]))
        t[best] += 1
        remaining -= 1

    final_picks: list[tuple[int, int]] = []
    for i in range(n):
        if remaining == 0:
            break
        g = next_chore(i)
        taken[g] = True
        bundles[i].append(g)
        final_picks.append((i, g))
        remaining -= 1

    allocation = Allocation.from_bundles(bundles, l)
    report = verify(instance, allocation, Criterion.ONE_WEF)
    if not report.satisfied:
        raise GuaranteeViolation(
            "round-robin output is not 1WEF",
            instance,
            {"owners": list(allocation.owners)},
        )
    return allocation, PickTrace(picks=tuple(picks), final_picks=tuple(final_picks))
