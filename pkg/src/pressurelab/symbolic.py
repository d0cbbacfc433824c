"""Subshifts of finite type, words, scales, and locally constant potentials.

Everything downstream works on one-sided shift spaces with the metric
d(x, y) = 2^-min{i : x_i != y_i}. Under that convention the dynamical ball
B_n(x, 2^-m) is exactly the cylinder of the first n + m symbols of x, and an
(n, 2^-m)-separated set picks one point per admissible word of length
n + m - 1. Those two bridges are what make every quantity in this package a
finite combinatorial object; they are exercised exhaustively in the tests.

Words are plain tuples of symbol indices. Higher-order constraints are out of
scope; the transition relation is always order 1, while potentials may look
at blocks of any fixed depth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

from .errors import (
    EnumerationBudgetExceeded,
    InadmissibleWord,
    InsufficientDepth,
    ScaleTooCoarse,
)

Word = Tuple[int, ...]

#: Hard cap on the number of words any enumeration may materialize.
DEFAULT_ENUMERATION_BUDGET = 2 ** 26


@dataclass(frozen=True)
class Subshift:
    """A one-sided subshift of finite type given by an order-1 relation.

    ``allowed[a][b]`` is True when the transition a -> b is admissible.
    Construction rejects stranded symbols (no successor or no predecessor),
    since such symbols cannot occur in any point of the space.
    """

    alphabet_size: int
    allowed: Tuple[Tuple[bool, ...], ...]
    label: str = ""

    def __post_init__(self):
        k = self.alphabet_size
        if k < 1:
            raise ValueError("alphabet_size must be at least 1")
        if len(self.allowed) != k or any(len(row) != k for row in self.allowed):
            raise ValueError("allowed relation must be alphabet_size x alphabet_size")
        for a in range(k):
            if not any(self.allowed[a]):
                raise ValueError(f"symbol {a} has no allowed successor")
            if not any(self.allowed[b][a] for b in range(k)):
                raise ValueError(f"symbol {a} has no allowed predecessor")

    @cached_property
    def successors(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(
            tuple(b for b in range(self.alphabet_size) if row[b])
            for row in self.allowed
        )

    @cached_property
    def predecessors(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(
            tuple(a for a in range(self.alphabet_size) if self.allowed[a][b])
            for b in range(self.alphabet_size)
        )

    def is_allowed(self, a: int, b: int) -> bool:
        return self.allowed[a][b]

    def is_admissible(self, word: Sequence[int]) -> bool:
        if any(not (0 <= a < self.alphabet_size) for a in word):
            return False
        return all(self.allowed[a][b] for a, b in zip(word, word[1:]))

    def require_admissible(self, word: Sequence[int]) -> None:
        if not self.is_admissible(word):
            raise InadmissibleWord(f"word {word!r} is not admissible in {self.label or 'this subshift'}")


def full_shift(alphabet_size: int, label: str = "") -> Subshift:
    """The full shift on ``alphabet_size`` symbols (every transition allowed)."""
    row = tuple(True for _ in range(alphabet_size))
    return Subshift(
        alphabet_size,
        tuple(row for _ in range(alphabet_size)),
        label or f"full-{alphabet_size}-shift",
    )


def golden_mean_shift(label: str = "golden-mean") -> Subshift:
    """The binary shift forbidding the block 11."""
    return Subshift(2, ((True, True), (True, False)), label)


def subshift_from_pairs(
    alphabet_size: int, pairs: Iterable[Tuple[int, int]], label: str = ""
) -> Subshift:
    rows = [[False] * alphabet_size for _ in range(alphabet_size)]
    for a, b in pairs:
        if not (0 <= a < alphabet_size and 0 <= b < alphabet_size):
            raise ValueError(f"transition ({a},{b}) outside alphabet")
        rows[a][b] = True
    return Subshift(alphabet_size, tuple(tuple(r) for r in rows), label)


@dataclass(frozen=True)
class Scale:
    """A dyadic scale epsilon = 2^-m."""

    m: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("scale exponent m must be nonnegative")

    @property
    def epsilon(self) -> float:
        return 2.0 ** (-self.m)

    def coarsen(self, steps: int) -> "Scale":
        """The scale 2^-(m - steps); raises if that would leave m negative."""
        if self.m - steps < 0:
            raise ScaleTooCoarse(
                f"cannot coarsen m={self.m} by {steps} steps"
            )
        return Scale(self.m - steps)


@dataclass(frozen=True, eq=False)
class LocallyConstantPotential:
    """A potential that depends on the first ``depth`` symbols only.

    ``table`` maps every admissible word of length ``depth`` to a finite
    value. Lookups on words outside the table raise InadmissibleWord, which
    doubles as the admissibility check in hot loops.
    """

    depth: int
    table: Mapping[Word, float]
    label: str = ""

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("potential depth must be at least 1")
        for w, v in self.table.items():
            if len(w) != self.depth:
                raise ValueError(f"table key {w!r} has length {len(w)} != depth {self.depth}")
            v = float(v)
            if v != v or v in (float("inf"), float("-inf")):
                raise ValueError(f"table value for {w!r} is not finite")

    def value(self, window: Word) -> float:
        try:
            return self.table[window]
        except KeyError:
            raise InadmissibleWord(
                f"window {window!r} is outside the potential's domain"
            ) from None

    @cached_property
    def sup_norm(self) -> float:
        return max(abs(v) for v in self.table.values())


def zero_potential(sft: Subshift) -> LocallyConstantPotential:
    return constant_potential(sft, 0.0)


def constant_potential(sft: Subshift, c: float) -> LocallyConstantPotential:
    table = {(a,): float(c) for a in range(sft.alphabet_size)}
    return LocallyConstantPotential(1, table, label=f"constant {c}")


def potential_from_table(
    sft: Subshift, depth: int, table: Mapping[Sequence[int], float], label: str = ""
) -> LocallyConstantPotential:
    """Build a potential, checking the table covers exactly the admissible words."""
    fixed: Dict[Word, float] = {}
    for w, v in table.items():
        w = tuple(w)
        if not sft.is_admissible(w):
            raise InadmissibleWord(f"potential key {w!r} is not admissible")
        fixed[w] = float(v)
    missing = [w for w in enumerate_words(sft, depth) if w not in fixed]
    if missing:
        raise ValueError(
            f"potential table is missing {len(missing)} admissible words, e.g. {missing[0]!r}"
        )
    return LocallyConstantPotential(depth, fixed, label=label)


# ---------------------------------------------------------------------------
# word enumeration


def count_words(sft: Subshift, n: int) -> int:
    """Exact number of admissible words of length n (exact integers)."""
    if n < 0:
        raise ValueError("word length must be nonnegative")
    if n == 0:
        return 1
    counts = [1] * sft.alphabet_size
    for _ in range(n - 1):
        counts = [
            sum(counts[b] for b in sft.successors[a])
            for a in range(sft.alphabet_size)
        ]
    return sum(counts)


def enumerate_words(
    sft: Subshift, n: int, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> Tuple[Word, ...]:
    """All admissible words of length n, lexicographically.

    Counts first and refuses to materialize more than ``budget`` words.
    Length 0 yields the empty-word singleton.
    """
    total = count_words(sft, n)
    if total > budget:
        raise EnumerationBudgetExceeded(total, budget)
    if n == 0:
        return ((),)
    out = []
    stack = [(a,) for a in reversed(range(sft.alphabet_size))]
    while stack:
        w = stack.pop()
        if len(w) == n:
            out.append(w)
            continue
        for b in reversed(sft.successors[w[-1]]):
            stack.append(w + (b,))
    return tuple(out)


# ---------------------------------------------------------------------------
# metric bridges


def bowen_ball_word_length(n: int, scale: Scale) -> int:
    """Cylinder depth of the ball B_n(x, 2^-m): n + m.

    A point y satisfies d_n(x, y) < 2^-m exactly when it agrees with x on
    the first n + m coordinates, so the ball is that cylinder.
    """
    if n < 1:
        raise ValueError("time horizon n must be at least 1")
    return n + scale.m


def separated_word_length(n: int, scale: Scale) -> int:
    """Prefix depth that characterizes (n, 2^-m)-separation: n + m - 1.

    Two points are more than 2^-m apart in d_n exactly when their first
    n + m - 1 symbols differ. m = 0 is rejected: at radius 1 no pair of
    points is ever separated, so the notion degenerates.
    """
    if n < 1:
        raise ValueError("time horizon n must be at least 1")
    if scale.m < 1:
        raise ScaleTooCoarse("separation requires m >= 1")
    return n + scale.m - 1


# ---------------------------------------------------------------------------
# Birkhoff sums


def birkhoff_sum(
    f: LocallyConstantPotential, w: Word, n: Optional[int] = None
) -> float:
    """The exact n-term sum of f along the orbit of any point in [w].

    Requires len(w) >= n + depth - 1 so that every summand is determined by
    the word itself. ``n`` defaults to the largest determined horizon.
    """
    k = f.depth
    if n is None:
        n = len(w) - k + 1
    if n < 1:
        raise InsufficientDepth(
            f"word of length {len(w)} determines no length-{k} window"
        )
    if len(w) < n + k - 1:
        raise InsufficientDepth(
            f"word of length {len(w)} cannot determine {n} summands of a depth-{k} potential"
        )
    return sum(f.value(w[i : i + k]) for i in range(n))


def _extreme_birkhoff(
    sft: Subshift, f: LocallyConstantPotential, w: Word, n: int, want_max: bool
) -> float:
    sft.require_admissible(w)
    if n < 1:
        raise ValueError("number of summands must be at least 1")
    k = f.depth
    need = n + k - 1
    if len(w) >= need:
        return birkhoff_sum(f, w[:need], n)
    pick = max if want_max else min
    memo: Dict[Tuple[Word, int], float] = {}

    def walk(ctx: Word, remaining: int) -> float:
        # ctx is the word so far while shorter than k-1 symbols, afterwards
        # just its last k-1 symbols; each appended symbol completes a window
        # exactly when it brings the running length up to k.
        if remaining == 0:
            return 0.0
        key = (ctx, remaining)
        if key in memo:
            return memo[key]
        succ = sft.successors[ctx[-1]] if ctx else range(sft.alphabet_size)
        best = None
        for b in succ:
            nxt = ctx + (b,)
            gain = f.value(nxt) if len(nxt) == k else 0.0
            if len(nxt) >= k:
                nxt = nxt[-(k - 1):] if k > 1 else ()
            v = gain + walk(nxt, remaining - 1)
            best = v if best is None else pick(best, v)
        if best is None:
            raise InadmissibleWord(f"no admissible extension from {ctx!r}")
        memo[key] = best
        return best

    base = birkhoff_sum(f, w, len(w) - k + 1) if len(w) >= k else 0.0
    tail_ctx = w if len(w) < k - 1 else (w[-(k - 1):] if k > 1 else ())
    return base + walk(tail_ctx, need - len(w))


def sup_birkhoff_on_cylinder(
    sft: Subshift, f: LocallyConstantPotential, w: Word, n: int
) -> float:
    """Exact supremum of the n-term Birkhoff sum over the cylinder [w].

    When the word already determines all n summands this is the literal sum;
    otherwise the undetermined tail windows are maximized over the finitely
    many admissible extensions.
    """
    return _extreme_birkhoff(sft, f, w, n, want_max=True)


def inf_birkhoff_on_cylinder(
    sft: Subshift, f: LocallyConstantPotential, w: Word, n: int
) -> float:
    """Exact infimum of the n-term Birkhoff sum over [w] (see sup variant)."""
    return _extreme_birkhoff(sft, f, w, n, want_max=False)


# ---------------------------------------------------------------------------
# graph utilities shared by transfer and harness code


def strongly_connected_components(
    adjacency: Sequence[Sequence[bool]],
) -> Tuple[Tuple[int, ...], ...]:
    """Tarjan's SCC algorithm, iterative, on a boolean adjacency matrix.

    Components come out sorted by smallest member for determinism.
    """
    n = len(adjacency)
    index_of = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list = []
    components = []
    counter = [0]

    for root in range(n):
        if index_of[root] != -1:
            continue
        work = [(root, iter([b for b in range(n) if adjacency[root][b]]))]
        index_of[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for b in it:
                if index_of[b] == -1:
                    index_of[b] = low[b] = counter[0]
                    counter[0] += 1
                    stack.append(b)
                    on_stack[b] = True
                    work.append((b, iter([c for c in range(n) if adjacency[b][c]])))
                    advanced = True
                    break
                elif on_stack[b]:
                    low[v] = min(low[v], index_of[b])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index_of[v]:
                comp = []
                while True:
                    u = stack.pop()
                    on_stack[u] = False
                    comp.append(u)
                    if u == v:
                        break
                components.append(tuple(sorted(comp)))
    return tuple(sorted(components))


def is_strongly_connected(adjacency: Sequence[Sequence[bool]]) -> bool:
    comps = strongly_connected_components(adjacency)
    return len(comps) == 1
