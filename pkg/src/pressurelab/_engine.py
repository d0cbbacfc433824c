"""Cylinder-tree dynamic programs shared by the capacity and cover modules.

Both the separated-set partition function and the optimal-cover value are
functionals over the tree of admissible words, filtered by a subset tracker.
Naively they need one node per word; here the recursion is factored through
the observation that a subtree's value depends on the word only through

- the depth d,
- the tracker state z,
- the last r symbols u, with r = max(1, k - 1, sigma),

once the common factor exp(S) is pulled out, where S is the sum of the
potential windows completed inside the word so far. Values are therefore
memoized on (d, z, u) and the whole computation costs O(L * |states| * A)
instead of O(A^L). Everything runs in log space so horizons of hundreds of
symbols neither overflow nor underflow.

Conventions used throughout:

- A node at depth d carries the horizon h = d - sigma. Cover terms weigh a
  node as exp(-s * h + extreme of f_h over the node's cylinder); partition
  leaves weigh as exp(extreme of f_h). ``sigma`` is 0 for ball covers (the
  ball of horizon n at scale m is the depth n + m cylinder, priced at its
  full depth), q - 1 for string covers over a depth-q partition, and m - 1
  for (n, 2^-m)-separated sums.
- With t = k - 1 - sigma, a depth-d node determines all but t of the h
  windows: t > 0 tail windows are extremized over admissible continuations,
  and t < 0 means the word determines more windows than the horizon needs,
  so the trailing ones are subtracted from the running sum.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .subsets import SubsetSpec, Tracker, build_tracker
from .symbolic import LocallyConstantPotential, Subshift, Word

NEG_INF = float("-inf")

Relation = Tuple[Tuple[bool, ...], ...]


def _logsumexp(values: List[float]) -> float:
    top = max(values)
    if top == NEG_INF:
        return NEG_INF
    return top + math.log(sum(math.exp(v - top) for v in values))


class _ExtensionTables:
    """Extremes of partial Birkhoff tails over admissible continuations.

    ext(rel, ctx, steps) walks ``steps`` symbols beyond ``ctx`` inside the
    relation ``rel``, completing one potential window whenever the running
    length reaches the potential depth, and returns the max (or min) total.
    ``ctx`` is the whole word while shorter than k - 1 symbols, else its last
    k - 1 symbols; that convention makes short prefixes near the root exact.
    """

    def __init__(self, f: LocallyConstantPotential, want_max: bool):
        self._f = f
        self._pick = max if want_max else min
        self._memo: Dict[Tuple[int, Word, int], float] = {}
        self._rels: Dict[int, Relation] = {}

    def value(self, rel: Relation, ctx: Word, steps: int) -> float:
        if steps <= 0:
            return 0.0
        rel_key = id(rel)
        self._rels[rel_key] = rel
        return self._walk(rel_key, ctx, steps)

    def _walk(self, rel_key: int, ctx: Word, steps: int) -> float:
        if steps == 0:
            return 0.0
        key = (rel_key, ctx, steps)
        got = self._memo.get(key)
        if got is not None:
            return got
        rel = self._rels[rel_key]
        k = self._f.depth
        n_sym = len(rel)
        if ctx:
            symbols = [b for b in range(n_sym) if rel[ctx[-1]][b]]
        else:
            symbols = [b for b in range(n_sym) if any(rel[b])]
        best = None
        for b in symbols:
            nxt = ctx + (b,)
            gain = self._f.value(nxt) if len(nxt) == k else 0.0
            if len(nxt) >= k:
                nxt = nxt[-(k - 1):] if k > 1 else ()
            v = gain + self._walk(rel_key, nxt, steps - 1)
            best = v if best is None else self._pick(best, v)
        out = NEG_INF if best is None else best
        self._memo[key] = out
        return out


class _TreeProgram:
    def __init__(
        self,
        sft: Subshift,
        spec: SubsetSpec,
        f: LocallyConstantPotential,
        sigma: int,
        want_max: bool,
    ):
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        self.sft = sft
        self.f = f
        self.sigma = sigma
        self.tracker: Tracker = build_tracker(spec, sft)
        self.r = max(1, f.depth - 1, sigma)
        self.ext = _ExtensionTables(f, want_max)
        self._outer = max if want_max else min

    def push(self, u: Word, b: int) -> Word:
        nxt = u + (b,)
        if len(nxt) > self.r:
            nxt = nxt[-self.r:]
        return nxt

    def window_gain(self, d: int, u: Word, b: int) -> float:
        # the symbol at depth d (0-based position d) completes a window when
        # the word reaches length d + 1 >= depth(f)
        k = self.f.depth
        if d + 1 < k:
            return 0.0
        return self.f.value((u + (b,))[-k:])

    def term_adjust(self, d: int, u: Word, rels: Sequence[Relation]) -> float:
        """Correction turning the in-word window sum into extreme f_(d - sigma).

        Positive-step case extends over continuations; negative case removes
        trailing windows the horizon does not use; returns -inf if no
        admissible continuation exists in any offered relation.
        """
        k = self.f.depth
        h = d - self.sigma
        if h < 1:
            raise ValueError(f"depth {d} gives nonpositive horizon with sigma {self.sigma}")
        in_word = max(0, d - k + 1)
        steps = h - in_word
        if steps > 0:
            ctx = u if len(u) < k - 1 else (u[-(k - 1):] if k > 1 else ())
            vals = [self.ext.value(rel, ctx, steps) for rel in rels]
            return self._outer(vals)
        if steps < 0:
            # subtract the last (-steps) windows, all determined by u
            total = 0.0
            L = len(u)
            for j in range(-steps):
                total += self.f.value(u[L - k - j : L - j])
            return -total
        return 0.0


def leaf_sum_log(
    sft: Subshift,
    spec: SubsetSpec,
    f: LocallyConstantPotential,
    sigma: int,
    depth: int,
    want_max: bool = True,
) -> float:
    """log of the sum over accepted depth-``depth`` words of exp(extreme f_h).

    h = depth - sigma. Tail windows beyond the word are extremized over
    continuations inside the target (per the tracker), so for a sub-SFT the
    value is the supremum of f_h over the points of the target in each
    cylinder. Returns -inf when no word is accepted.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if depth - sigma < 1:
        raise ValueError("depth must exceed sigma")
    prog = _TreeProgram(sft, spec, f, sigma, want_max)
    memo: Dict[Tuple[int, object, Word], float] = {}

    def value(d: int, z, u: Word) -> float:
        if d == depth:
            if not prog.tracker.accepts(z, depth):
                return NEG_INF
            rels = prog.tracker.extension_relations(z)
            return prog.term_adjust(d, u, rels)
        key = (d, z, u)
        got = memo.get(key)
        if got is not None:
            return got
        prev = u[-1] if u else None
        symbols = range(sft.alphabet_size) if prev is None else sft.successors[prev]
        acc: List[float] = []
        for b in symbols:
            z2 = prog.tracker.step(z, prev, b)
            if z2 is None:
                continue
            acc.append(prog.window_gain(d, u, b) + value(d + 1, z2, prog.push(u, b)))
        out = _logsumexp(acc) if acc else NEG_INF
        memo[key] = out
        return out

    return value(0, prog.tracker.initial(), ())


def cover_min_log(
    sft: Subshift,
    spec: SubsetSpec,
    f: LocallyConstantPotential,
    s: float,
    sigma: int,
    d_min: int,
    d_max: int,
    centered: bool = False,
) -> float:
    """log of the minimal cover value over the cylinder tree.

    A cover may place a ball at any node of depth d in [d_min, d_max]; the
    ball costs exp(-s * (d - sigma) + F) with F the supremum (infimum when
    ``centered``) of f_(d - sigma) over the node's full cylinder, and it
    covers every accepted leaf at depth d_max below the node. Leaves that the
    tracker rejects need no covering. Returns -inf when nothing is accepted
    (the empty cover costs zero); callers that consider that an error should
    check emptiness beforehand.
    """
    if d_min < 1 or d_min > d_max:
        raise ValueError("need 1 <= d_min <= d_max")
    if d_min - sigma < 1:
        raise ValueError("d_min must exceed sigma")
    prog = _TreeProgram(sft, spec, f, sigma, want_max=not centered)
    host_rels = (sft.allowed,)
    memo: Dict[Tuple[int, object, Word], float] = {}

    def ball_log(d: int, u: Word) -> float:
        return -s * (d - sigma) + prog.term_adjust(d, u, host_rels)

    def value(d: int, z, u: Word) -> float:
        if d == d_max:
            if prog.tracker.accepts(z, d_max):
                return ball_log(d, u)
            return NEG_INF
        key = (d, z, u)
        got = memo.get(key)
        if got is not None:
            return got
        prev = u[-1] if u else None
        symbols = range(sft.alphabet_size) if prev is None else sft.successors[prev]
        acc: List[float] = []
        for b in symbols:
            z2 = prog.tracker.step(z, prev, b)
            if z2 is None:
                continue
            acc.append(prog.window_gain(d, u, b) + value(d + 1, z2, prog.push(u, b)))
        out = _logsumexp(acc) if acc else NEG_INF
        if d >= d_min:
            ball = ball_log(d, u)
            # exact ties resolve toward the shallower ball; the value is the
            # same either way, this just pins down which cover the DP means
            if ball <= out:
                out = ball
        memo[key] = out
        return out

    return value(0, prog.tracker.initial(), ())
