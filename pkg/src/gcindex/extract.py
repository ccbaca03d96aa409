"""Text extraction from the grammar tree.

Three regimes: full rule expansion by walking the grammar tree, arbitrary
substrings by descending from the root with phrase starts from ``L``, and
prefixes/suffixes of rules in O(length) steps through tries of leftmost
and rightmost paths.

All walks use an explicit stack of work items, never Python recursion,
since the parse tree height is unbounded. Items are tuples:

``(SYM, x)``
    emit ``F(X_x)`` (or its reverse for suffix walks);
``(PATH, p, D, d)``
    emit the contribution of the trie ancestor at depth ``d`` of the trie
    node with preorder ``p`` (which has depth ``D``), then continue with
    ``d + 1``;
``(KIDS, w, j, deg)``
    emit child ``j`` of grammar-tree node ``w``, then its next child in
    walk direction.
"""

from __future__ import annotations

import math
from typing import Iterator

from .grammar import GrammarTree, PreprocessedGrammar
from .succinct import DfudsTree, InvertiblePermutation
from .succinct._io import ByteReader, ByteWriter, FormatError

_VERSION = 1

SYM, PATH, KIDS = 0, 1, 2

LEFT, RIGHT = "left", "right"


class PathTrie:
    """Trie of leftmost (or rightmost) grammar paths.

    Each symbol labels exactly one node. The trie parent of a non-terminal
    rule is the first (last) symbol of its right-hand side; terminal rules
    hang from the root. ``X_S`` maps preorder ``p`` (minus one, skipping the
    root) to the symbol stored there.
    """

    def __init__(self, topology: DfudsTree, xs: InvertiblePermutation, direction: str):
        if direction not in (LEFT, RIGHT):
            raise ValueError(f"direction must be {LEFT!r} or {RIGHT!r}")
        self.topology = topology
        self.xs = xs
        self.direction = direction

    def node_of(self, a: int) -> int:
        return self.topology.node(self.xs.inverse(a) + 1)

    def symbol(self, v: int) -> int:
        return self.xs.apply(self.topology.preorder(v) - 1)

    def parent_symbol(self, a: int) -> int | None:
        par = self.topology.parent(self.node_of(a))
        return None if par == self.topology.root else self.symbol(par)

    def end_symbol(self, a: int) -> int:
        """Terminal rule at the start (end) of ``F(X_a)``."""
        t = self.topology
        v = self.node_of(a)
        d = t.depth(v)
        return self.symbol(t.level_ancestor(v, d - 1))

    def size_in_bits(self) -> int:
        return len(self.to_bytes()) * 8

    def to_bytes(self) -> bytes:
        w = ByteWriter(_VERSION).u8(0 if self.direction == LEFT else 1)
        return w.blob(self.topology.to_bytes()).blob(self.xs.to_bytes()).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "PathTrie":
        r = ByteReader(data, _VERSION, "path trie")
        flag = r.u8()
        if flag > 1:
            raise FormatError("path trie: bad direction flag")
        topo = DfudsTree.from_bytes(r.blob())
        xs = InvertiblePermutation.from_bytes(r.blob())
        r.done()
        if len(xs) != topo.nodes - 1:
            raise FormatError("path trie: permutation size does not match the topology")
        return cls(topo, xs, LEFT if flag == 0 else RIGHT)


def trie_period(epsilon: float) -> int:
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")
    return math.ceil(1 / epsilon)


def build_path_trie(pg: PreprocessedGrammar, direction: str = LEFT, epsilon: float = 1.0) -> PathTrie:
    n = pg.n
    end = 0 if direction == LEFT else -1
    children: list[list[int]] = [[] for _ in range(n + 1)]  # index 0 is the root
    for a in range(1, n + 1):
        rhs = pg.rules[a - 1]
        children[0 if rhs[0] < 0 else rhs[end]].append(a)
    degrees: list[int] = []
    xs: list[int] = []
    stack = [0]
    while stack:
        a = stack.pop()
        degrees.append(len(children[a]))
        if a:
            xs.append(a)
        stack.extend(reversed(children[a]))
    if len(xs) != n:
        raise ValueError("path trie does not reach every symbol")
    topo = DfudsTree(degrees, depth_index=True)
    return PathTrie(topo, InvertiblePermutation(xs, trie_period(epsilon)), direction)


class Extractor:
    """Extraction over a grammar tree and its two path tries.

    ``steps`` counts work items processed since the last reset; tests use
    it to check that prefix and suffix walks stay linear in the output.
    """

    def __init__(self, tree: GrammarTree, left: PathTrie, right: PathTrie):
        self.tree = tree
        self.left = left
        self.right = right
        self.steps = 0

    # -- the shared walker --------------------------------------------------

    def _walk(self, stack: list[tuple], forward: bool) -> Iterator[int]:
        """Stream bytes in text order (``forward``) or reversed order."""
        tree = self.tree
        topo = tree.topology
        y = tree.y
        alphabet = tree.alphabet
        trie = self.left if forward else self.right
        ttopo = trie.topology
        xs = trie.xs
        step = 1 if forward else -1
        while stack:
            item = stack.pop()
            self.steps += 1
            kind = item[0]
            if kind == SYM:
                x = item[1]
                if y.access(x):
                    yield alphabet[y.rank1(x) - 1]
                else:
                    p = xs.inverse(x) + 1
                    stack.append((PATH, p, ttopo.depth_of_preorder(p), 1))
            elif kind == PATH:
                # trie nodes are handled by preorder: the depth-d ancestor is
                # a level-ancestor query on the depth index
                _, p, depth, d = item
                s = xs.apply(ttopo.ancestor_preorder(p, d) - 1)
                if d < depth:
                    stack.append((PATH, p, depth, d + 1))
                if d == 1:
                    yield alphabet[y.rank1(s) - 1]
                else:
                    w = tree.definition(s)
                    deg = topo.degree(w)
                    stack.append((KIDS, w, 2 if forward else deg - 1, deg))
            else:
                _, w, j, deg = item
                nj = j + step
                if 1 <= nj <= deg:
                    stack.append((KIDS, w, nj, deg))
                stack.append((SYM, tree.label(topo.child(w, j))))

    def iter_prefix(self, a: int) -> Iterator[int]:
        """Bytes of ``F(X_a)`` left to right, produced lazily."""
        return self._walk([(SYM, a)], True)

    def iter_suffix_reversed(self, a: int) -> Iterator[int]:
        """Bytes of ``F(X_a)`` right to left, produced lazily."""
        return self._walk([(SYM, a)], False)

    def iter_siblings(self, v: int) -> Iterator[int]:
        """Text from the start of node ``v`` to the end of its parent's span."""
        topo = self.tree.topology
        c: int | None = v
        while c is not None:
            yield from self._walk([(SYM, self.tree.label(c))], True)
            c = topo.nextsibling(c)

    # -- public extraction --------------------------------------------------

    def first_terminal(self, a: int) -> int:
        return self.tree.terminal_byte(self.left.end_symbol(a))

    def last_terminal(self, a: int) -> int:
        return self.tree.terminal_byte(self.right.end_symbol(a))

    def expand_prefix(self, a: int, length: int) -> bytes:
        if length < 1:
            raise ValueError("length must be >= 1")
        out = bytearray()
        for b in self.iter_prefix(a):
            out.append(b)
            if len(out) == length:
                break
        return bytes(out)

    def expand_suffix(self, a: int, length: int) -> bytes:
        if length < 1:
            raise ValueError("length must be >= 1")
        out = bytearray()
        for b in self.iter_suffix_reversed(a):
            out.append(b)
            if len(out) == length:
                break
        out.reverse()
        return bytes(out)

    def expand_rule(self, a: int) -> bytes:
        """Full ``F(X_a)`` by a DFS of the grammar tree, jumping from leaves to definitions."""
        tree = self.tree
        topo = tree.topology
        if tree.is_terminal(a):
            return bytes([tree.terminal_byte(a)])
        out = bytearray()
        stack = [tree.definition(a)]
        while stack:
            w = stack.pop()
            self.steps += 1
            if topo.is_leaf(w):
                x = tree.label(w)
                if tree.is_terminal(x):
                    out.append(tree.terminal_byte(x))
                else:
                    stack.append(tree.definition(x))
            else:
                stack.extend(reversed(list(topo.children(w))))
        return bytes(out)

    def child_at(self, v: int, p: int) -> tuple[int, int]:
        """Child ``k`` of ``v`` whose span contains text position ``p``, by binary search on phrase starts."""
        tree = self.tree
        topo = tree.topology
        lo, hi = 1, topo.degree(v)
        while lo < hi:
            mid = (lo + hi + 1) >> 1
            if tree.start_of(topo.child(v, mid)) <= p:
                lo = mid
            else:
                hi = mid - 1
        return lo, topo.child(v, lo)

    def extract(self, p: int, length: int) -> bytes:
        """``T[p .. p + length - 1]`` (1-based)."""
        tree = self.tree
        topo = tree.topology
        u = tree.u
        if length < 0 or p < 1 or p > u or p + length - 1 > u:
            raise IndexError(f"range [{p}, {p + length - 1}] outside [1, {u}]")
        if length == 0:
            return b""
        stack: list[tuple] = []
        v = topo.root
        pos = p
        # descend to the leaf holding p, jumping from repeated leaves to definitions
        while True:
            if topo.is_leaf(v):
                x = tree.label(v)
                if tree.is_terminal(x):
                    break
                d = tree.definition(x)
                pos = tree.start_of(d) + pos - tree.start_of(v)
                v = d
                continue
            k, c = self.child_at(v, pos)
            deg = topo.degree(v)
            if k < deg:
                stack.append((KIDS, v, k + 1, deg))
            v = c
        out = bytearray([tree.terminal_byte(tree.label(v))])
        if length > 1:
            for b in self._walk(stack, True):
                out.append(b)
                if len(out) == length:
                    break
        return bytes(out)


def build_extractor(pg: PreprocessedGrammar, tree: GrammarTree, epsilon: float = 1.0) -> Extractor:
    return Extractor(tree, build_path_trie(pg, LEFT, epsilon), build_path_trie(pg, RIGHT, epsilon))
