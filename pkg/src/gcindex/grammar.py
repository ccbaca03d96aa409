"""Grammars generating a single string, their normalization, and the grammar tree.

Symbols are 1-based rule ids. In a raw :class:`Grammar` a right-hand side
mixes nonterminal ids (positive ints) with terminal bytes, encoded as
negative tokens via :func:`terminal`.

Preprocessing runs four passes, each returning a new grammar:

1. :func:`normalize_terminals` gives every byte a dedicated rule ``X_a -> a``.
2. :func:`remove_short_rules` drops unary rules ``X_i -> X_j``.
3. :func:`inline_single_use` inlines nonterminals mentioned only once.
4. :func:`reverse_lex_renumber` renumbers so that ``i < j`` iff
   ``F(X_i)`` reversed sorts before ``F(X_j)`` reversed.

Sizes follow the index's conventions: ``n`` counts all rules including
the ``sigma`` terminal rules, and ``N`` sums right-hand side lengths of the
non-terminal rules only, so the grammar tree has ``N + 1`` nodes and the
binary relation has ``N + sigma - n`` columns.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ._sorting import SubstringSorter
from .succinct import BitVector, DfudsTree, IntSequence, InvertiblePermutation, NotFoundError, SparseBitmap

log = logging.getLogger(__name__)

# below this text length reversed expansions are compared directly
DIRECT_SORT_LIMIT = 4096


class GrammarError(ValueError):
    """The rule set does not describe a grammar for a single finite string."""


def terminal(byte: int) -> int:
    return -(byte + 1)


def is_terminal(token: int) -> bool:
    return token < 0


def terminal_byte(token: int) -> int:
    return -token - 1


@dataclass
class Grammar:
    """Raw rules; ``rules[k - 1]`` is the right-hand side of nonterminal ``k``."""

    rules: list[tuple[int, ...]]
    start: int

    def __post_init__(self):
        self.rules = [tuple(r) for r in self.rules]

    @property
    def n(self) -> int:
        return len(self.rules)

    @property
    def size(self) -> int:
        return sum(len(r) for r in self.rules)

    def rhs(self, k: int) -> tuple[int, ...]:
        return self.rules[k - 1]

    def is_terminal_rule(self, k: int) -> bool:
        r = self.rules[k - 1]
        return len(r) == 1 and r[0] < 0

    def expansion_lengths(self) -> list[int]:
        """``lengths[k - 1] = |F(X_k)|``; the grammar must be acyclic."""
        lengths: list[int | None] = [None] * self.n
        for root in range(1, self.n + 1):
            if lengths[root - 1] is not None:
                continue
            stack = [root]
            while stack:
                k = stack[-1]
                pending = [t for t in self.rules[k - 1] if t > 0 and lengths[t - 1] is None]
                if pending:
                    stack.extend(pending)
                    continue
                stack.pop()
                lengths[k - 1] = sum(1 if t < 0 else lengths[t - 1] for t in self.rules[k - 1])
        return lengths  # type: ignore[return-value]

    def text_length(self) -> int:
        return self.expansion_lengths()[self.start - 1]

    def expand(self, k: int | None = None) -> bytes:
        return expand_rules(self.rules, self.start if k is None else k)


def expand_rules(rules: Sequence[Sequence[int]], k: int) -> bytes:
    out = bytearray()
    stack = [k]
    while stack:
        t = stack.pop()
        if t < 0:
            out.append(-t - 1)
        else:
            stack.extend(reversed(rules[t - 1]))
    return bytes(out)


def _renumber(g: Grammar, keep: Sequence[int], start: int) -> Grammar:
    """Keep rules ``keep`` (old ids, in that order) and remap references."""
    new_id = {old: new for new, old in enumerate(keep, 1)}
    rules = [tuple(t if t < 0 else new_id[t] for t in g.rules[old - 1]) for old in keep]
    return Grammar(rules, new_id[start])


def validate(g: Grammar) -> Grammar:
    """Check the rule set and drop unreachable rules.

    Raises :class:`GrammarError` for bad references, empty right-hand
    sides, or cycles. Returns a grammar whose every rule is reachable from
    the start symbol, in the original relative order.
    """
    n = g.n
    if not 1 <= g.start <= n:
        raise GrammarError(f"start symbol {g.start} is not a rule (have {n})")
    for k, rhs in enumerate(g.rules, 1):
        if not rhs:
            raise GrammarError(f"rule {k} has an empty right-hand side")
        for t in rhs:
            if t > n or t == 0:
                raise GrammarError(f"rule {k} references undefined nonterminal {t}")
            if t < 0 and terminal_byte(t) > 255:
                raise GrammarError(f"rule {k} has a terminal outside the byte range")
    # iterative DFS with colours: 0 new, 1 on stack, 2 done
    colour = [0] * (n + 1)
    stack = [(g.start, 0)]
    colour[g.start] = 1
    while stack:
        k, i = stack[-1]
        rhs = g.rules[k - 1]
        while i < len(rhs) and (rhs[i] < 0 or colour[rhs[i]] == 2):
            i += 1
        if i == len(rhs):
            colour[k] = 2
            stack.pop()
            continue
        stack[-1] = (k, i + 1)
        t = rhs[i]
        if colour[t] == 1:
            raise GrammarError(f"cycle through nonterminal {t}")
        colour[t] = 1
        stack.append((t, 0))
    keep = [k for k in range(1, n + 1) if colour[k] == 2]
    if len(keep) < n:
        dropped = n - len(keep)
        log.warning("dropping %d unreachable rule(s)", dropped)
        return _renumber(g, keep, g.start)
    return Grammar(list(g.rules), g.start)


def normalize_terminals(g: Grammar) -> Grammar:
    """Give each terminal byte its own rule ``X_a -> a`` and reference it everywhere else."""
    dedicated: dict[int, int] = {}
    for k, rhs in enumerate(g.rules, 1):
        if len(rhs) == 1 and rhs[0] < 0:
            dedicated.setdefault(rhs[0], k)
    rules = list(g.rules)
    used = sorted({t for rhs in g.rules for t in rhs if t < 0})
    for t in used:
        if t not in dedicated:
            rules.append((t,))
            dedicated[t] = len(rules)
    out = []
    for k, rhs in enumerate(rules, 1):
        if len(rhs) == 1 and rhs[0] < 0 and dedicated[rhs[0]] == k:
            out.append(rhs)
        else:
            out.append(tuple(dedicated[t] if t < 0 else t for t in rhs))
    return Grammar(out, g.start)


def remove_short_rules(g: Grammar) -> Grammar:
    """Replace every unary nonterminal rule ``X_i -> X_j`` by ``X_j`` everywhere."""
    target = list(range(g.n + 1))

    def resolve(k: int) -> int:
        path = []
        while True:
            rhs = g.rules[k - 1]
            if len(rhs) == 1 and rhs[0] > 0:
                path.append(k)
                k = rhs[0]
            else:
                break
        for p in path:
            target[p] = k
        return k

    unary = [k for k, rhs in enumerate(g.rules, 1) if len(rhs) == 1 and rhs[0] > 0]
    if not unary:
        return Grammar(list(g.rules), g.start)
    for k in unary:
        resolve(k)
    rules = [tuple(t if t < 0 else target[t] for t in rhs) for rhs in g.rules]
    dropped = set(unary)
    keep = [k for k in range(1, g.n + 1) if k not in dropped]
    return _renumber(Grammar(rules, target[g.start]), keep, target[g.start])


def inline_single_use(g: Grammar) -> Grammar:
    """Inline every nonterminal (other than the start and terminal rules) mentioned once."""
    count = [0] * (g.n + 1)
    for rhs in g.rules:
        for t in rhs:
            if t > 0:
                count[t] += 1
    kept = [k == g.start or g.is_terminal_rule(k) or count[k] >= 2 for k in range(g.n + 1)]
    if all(kept[1:]):
        return Grammar(list(g.rules), g.start)
    rules = list(g.rules)
    for k in range(1, g.n + 1):
        if not kept[k]:
            continue
        rhs = g.rules[k - 1]
        if all(t < 0 or kept[t] for t in rhs):
            continue
        flat: list[int] = []
        stack = list(reversed(rhs))
        while stack:
            t = stack.pop()
            if t < 0 or kept[t]:
                flat.append(t)
            else:
                stack.extend(reversed(g.rules[t - 1]))
        rules[k - 1] = tuple(flat)
    keep = [k for k in range(1, g.n + 1) if kept[k]]
    return _renumber(Grammar(rules, g.start), keep, g.start)


@dataclass
class PreprocessedGrammar:
    """Normalized, renumbered grammar ready for indexing."""

    rules: list[tuple[int, ...]]
    start: int
    y: BitVector
    lengths: list[int]
    alphabet: bytes
    # new id -> id in the grammar handed to reverse_lex_renumber
    order: list[int] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.rules)

    @property
    def sigma(self) -> int:
        return len(self.alphabet)

    @property
    def size(self) -> int:
        """``N``: total right-hand side length over non-terminal rules."""
        return sum(len(r) for r in self.rules if r[0] > 0)

    @property
    def u(self) -> int:
        return self.lengths[self.start - 1]

    def is_terminal_rule(self, k: int) -> bool:
        return self.rules[k - 1][0] < 0

    def rhs(self, k: int) -> tuple[int, ...]:
        return self.rules[k - 1]

    def expand(self, k: int | None = None) -> bytes:
        return expand_rules(self.rules, self.start if k is None else k)


def first_occurrence_starts(g: Grammar, lengths: Sequence[int]) -> list[int]:
    """1-based text start of some occurrence of every symbol (its first in DFS order)."""
    starts = [0] * (g.n + 1)
    seen = [False] * (g.n + 1)
    stack = [(g.start, 1)]
    while stack:
        k, pos = stack.pop()
        if seen[k]:
            continue
        seen[k] = True
        starts[k] = pos
        rhs = g.rules[k - 1]
        if rhs[0] < 0:
            continue
        offsets = []
        p = pos
        for t in rhs:
            offsets.append((t, p))
            p += lengths[t - 1]
        stack.extend(reversed(offsets))
    return starts


def reverse_lex_renumber(g: Grammar, direct_limit: int = DIRECT_SORT_LIMIT) -> PreprocessedGrammar:
    """Renumber so that reversed expansions are sorted; ties keep the old id order."""
    lengths = g.expansion_lengths()
    text = g.expand()
    u = len(text)
    starts = first_occurrence_starts(g, lengths)
    ids = list(range(1, g.n + 1))
    if u <= direct_limit:
        order = sorted(ids, key=lambda k: (text[starts[k] - 1: starts[k] - 1 + lengths[k - 1]][::-1], k))
    else:
        rev = text[::-1]
        # F(X_k) reversed starts in rev where the occurrence ends in text
        items = [(u - (starts[k] + lengths[k - 1] - 1), lengths[k - 1]) for k in ids]
        order = [ids[i] for i in SubstringSorter(rev).sort(items, ties=ids)]
    new_id = {old: new for new, old in enumerate(order, 1)}
    rules = [tuple(t if t < 0 else new_id[t] for t in g.rules[old - 1]) for old in order]
    y_bits = [1 if r[0] < 0 else 0 for r in rules]
    alphabet = bytes(terminal_byte(r[0]) for r in rules if r[0] < 0)
    return PreprocessedGrammar(
        rules=rules,
        start=new_id[g.start],
        y=BitVector(y_bits),
        lengths=[lengths[old - 1] for old in order],
        alphabet=alphabet,
        order=order,
    )


def preprocess(g: Grammar, direct_limit: int = DIRECT_SORT_LIMIT) -> PreprocessedGrammar:
    g = validate(g)
    g = normalize_terminals(g)
    g = remove_short_rules(g)
    g = inline_single_use(g)
    return reverse_lex_renumber(g, direct_limit)


def expand(pg: PreprocessedGrammar | Grammar, a: int) -> bytes:
    return expand_rules(pg.rules, a)


# -- grammar tree -------------------------------------------------------------

class GrammarTree:
    """Pruned parse tree: DFUDS topology plus the compressed preorder label sequence.

    Labels are split into ``Z`` (ones at the node defining each non-terminal
    rule), ``X'`` (every other label, in preorder) and ``pi``, which maps a
    non-terminal rule (ranked among Y's zeros) to the rank of its defining
    node among Z's ones. ``L`` marks the text start of every leaf phrase
    plus a sentinel at ``u + 1``.
    """

    def __init__(self, topology: DfudsTree, z: BitVector, xprime: IntSequence, pi: InvertiblePermutation,
                 y: BitVector, leaf_starts: SparseBitmap, alphabet: bytes, start: int):
        self.topology = topology
        self.z = z
        self.xprime = xprime
        self.pi = pi
        self.y = y
        self.leaf_starts = leaf_starts
        self.alphabet = alphabet
        self.start = start
        self.n = len(y)
        self.u = leaf_starts.universe - 1
        # occurrences of each symbol in X' (leaf copies), cached from X' itself
        self._copies: dict[int, int] = {}

    @property
    def nodes(self) -> int:
        return self.topology.nodes

    @property
    def size(self) -> int:
        return self.topology.nodes - 1

    def is_terminal(self, a: int) -> bool:
        return self.y.access(a) == 1

    def terminal_byte(self, a: int) -> int:
        return self.alphabet[self.y.rank1(a) - 1]

    def terminal_symbol(self, byte: int) -> int | None:
        k = self.alphabet.find(bytes([byte]))
        return None if k < 0 else self.y.select1(k + 1)

    def label_access(self, p: int) -> int:
        z = self.z
        if not 1 <= p <= z.length:
            raise IndexError(f"preorder {p} outside [1, {z.length}]")
        if z.access(p):
            return self.y.select0(self.pi.inverse(z.rank1(p)))
        return self.xprime.access(p - z.rank1(p))

    def label(self, v: int) -> int:
        return self.label_access(self.topology.preorder(v))

    def copies(self, a: int) -> int:
        """Number of nodes labeled ``a``."""
        c = self._copies.get(a)
        if c is None:
            c = self.xprime.rank(a, self.xprime.length) + (0 if self.is_terminal(a) else 1)
            self._copies[a] = c
        return c

    def label_select(self, a: int, j: int) -> int:
        """Preorder of the ``j``-th node labeled ``a``; ``j = 1`` is the definition of a non-terminal rule."""
        if not 1 <= a <= self.n:
            raise IndexError(f"symbol {a} outside [1, {self.n}]")
        if self.is_terminal(a):
            return self.z.select0(self.xprime.select(a, j))
        if j == 1:
            return self.z.select1(self.pi.apply(self.y.rank0(a)))
        if j < 1:
            raise NotFoundError(f"occurrence {j} of symbol {a}")
        return self.z.select0(self.xprime.select(a, j - 1))

    def definition(self, a: int) -> int:
        """Node where non-terminal rule ``a`` is defined."""
        return self.topology.node(self.z.select1(self.pi.apply(self.y.rank0(a))))

    def start_of(self, v: int) -> int:
        """1-based text position where node ``v``'s span begins."""
        return self.leaf_starts.select1(self.topology.leafrank(v) + 1)

    def end_of(self, v: int) -> int:
        """1-based text position just past node ``v``'s span."""
        t = self.topology
        return self.leaf_starts.select1(t.leafrank(v) + t.numleaves(v) + 1)

    def labels(self) -> list[int]:
        return [self.label_access(p) for p in range(1, self.nodes + 1)]

    def height(self) -> int:
        return self.topology.height()


def build_grammar_tree(pg: PreprocessedGrammar, delta: float | None = None) -> GrammarTree:
    """One DFS builds topology, Z, X', pi and the phrase-start bitmap L.

    ``delta`` sets pi's inverse sampling period to ``ceil(1 / delta)``; the
    default period is ``ceil(lg n)``.
    """
    period = permutation_period(delta, pg.n)
    n, u = pg.n, pg.u
    defined = [False] * (n + 1)
    degrees: list[int] = []
    z_bits: list[int] = []
    xprime: list[int] = []
    def_order: list[int] = []
    leaf_starts: list[int] = []
    pos = 1
    stack = [pg.start]
    while stack:
        x = stack.pop()
        rhs = pg.rules[x - 1]
        if rhs[0] < 0 or defined[x]:
            degrees.append(0)
            z_bits.append(0)
            xprime.append(x)
            leaf_starts.append(pos)
            pos += pg.lengths[x - 1]
        else:
            defined[x] = True
            degrees.append(len(rhs))
            z_bits.append(1)
            def_order.append(x)
            stack.extend(reversed(rhs))
    # pi[rank0(Y, x)] = rank of x's definition among Z's ones
    y = pg.y
    pi_vals = [0] * y.zeros
    for k, x in enumerate(def_order, 1):
        pi_vals[y.rank0(x) - 1] = k
    leaf_starts.append(u + 1)
    return GrammarTree(
        topology=DfudsTree(degrees),
        z=BitVector(z_bits),
        xprime=IntSequence(xprime, n),
        pi=InvertiblePermutation(pi_vals, period),
        y=y,
        leaf_starts=SparseBitmap(leaf_starts, u + 1),
        alphabet=pg.alphabet,
        start=pg.start,
    )


def permutation_period(fraction: float | None, n: int) -> int:
    if fraction is None:
        return max(1, math.ceil(math.log2(max(2, n))))
    if not 0 < fraction <= 1:
        raise ValueError(f"sampling fraction must be in (0, 1], got {fraction}")
    return math.ceil(1 / fraction)


def plain_labels(pg: PreprocessedGrammar) -> list[int]:
    """Uncompressed preorder label array of the grammar tree (test oracle)."""
    out = []
    defined = set()
    stack = [pg.start]
    while stack:
        x = stack.pop()
        out.append(x)
        if pg.rules[x - 1][0] > 0 and x not in defined:
            defined.add(x)
            stack.extend(reversed(pg.rules[x - 1]))
    return out


def symbols_used(rules: Iterable[Sequence[int]]) -> set[int]:
    return {t for rhs in rules for t in rhs if t > 0}
