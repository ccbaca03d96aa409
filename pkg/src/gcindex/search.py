"""Pattern location: the binary relation of rule suffixes plus occurrence tracking.

A primary occurrence spans at least two phrases, so for some split
``P = P1 . P2`` there is a rule ``X_i -> ... A B ...`` where ``F(A)`` ends
with ``P1`` and the text from ``B`` to the end of ``X_i`` starts with ``P2``.
Rows of the relation are symbols in reverse-lex order, columns are rule
suffixes sorted by their expansion, so both conditions are contiguous
ranges found by binary search. Secondary occurrences are then found by
climbing the grammar tree and fanning out to every copy of each symbol.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from ._sorting import SubstringSorter
from .extract import Extractor
from .grammar import GrammarTree
from .succinct import IntSequence
from .succinct._io import ByteReader, ByteWriter, FormatError

_VERSION = 1

Range = tuple[int, int]
EMPTY: Range = (1, 0)


class BinaryRelation:
    """One point per column: ``S_B[c]`` is the row, ``S_L[c]`` the label (a grammar-tree preorder)."""

    def __init__(self, rows: IntSequence, labels: list[int]):
        if len(rows) != len(labels):
            raise ValueError("row and label sequences differ in length")
        self.rows = rows
        self.labels = labels

    @property
    def columns(self) -> int:
        return len(self.labels)

    def points(self, cols: Range, rows: Range) -> list[tuple[int, int]]:
        """``(column, row)`` pairs inside the rectangle."""
        if cols[0] > cols[1] or rows[0] > rows[1] or not self.columns:
            return []
        return self.rows.range_report(cols, rows)

    def rows_to_bytes(self) -> bytes:
        return self.rows.to_bytes()

    def labels_to_bytes(self) -> bytes:
        return ByteWriter(_VERSION).uints(self.labels).getvalue()

    @classmethod
    def from_sections(cls, rows_raw: bytes, labels_raw: bytes) -> "BinaryRelation":
        rows = IntSequence.from_bytes(rows_raw)
        r = ByteReader(labels_raw, _VERSION, "relation labels")
        labels = r.uints()
        r.done()
        if len(labels) != len(rows):
            raise FormatError("relation: label count does not match the row sequence")
        return cls(rows, labels)

    def size_in_bits(self) -> int:
        return (len(self.rows_to_bytes()) + len(self.labels_to_bytes())) * 8


def relation_columns(tree: GrammarTree) -> list[tuple[int, int, int, int]]:
    """``(row, label, start, end)`` for every proper rule suffix, in preorder of definitions.

    ``start`` is the 1-based text position of the suffix's first child and
    ``end`` the position just past its parent's span.
    """
    topo = tree.topology
    out = []
    for p in range(1, tree.nodes + 1):
        if not tree.z.access(p):
            continue
        w = topo.node(p)
        end = tree.end_of(w)
        prev = topo.child(w, 1)
        prev_label = tree.label(prev)
        c = topo.nextsibling(prev)
        while c is not None:
            lab = tree.label(c)
            out.append((prev_label, topo.preorder(c), tree.start_of(c), end))
            prev_label = lab
            c = topo.nextsibling(c)
    return out


def build_relation(tree: GrammarTree, text: bytes) -> BinaryRelation:
    cols = relation_columns(tree)
    items = [(start - 1, end - start) for _, _, start, end in cols]
    order = SubstringSorter(text).sort(items, ties=[lab for _, lab, _, _ in cols]) if cols else []
    rows = [cols[k][0] for k in order]
    labels = [cols[k][1] for k in order]
    return BinaryRelation(IntSequence(rows, tree.n), labels)


class _Lazy:
    """Bytes pulled from an iterator on demand and kept for later comparisons."""

    __slots__ = ("buf", "it")

    def __init__(self, it: Iterator[int]):
        self.buf = bytearray()
        self.it = it

    def compare(self, pattern: bytes) -> int:
        """-1, 0, 1 as the stream sorts before, starts with, or sorts after ``pattern``."""
        buf = self.buf
        for k, c in enumerate(pattern):
            if k == len(buf):
                b = next(self.it, None)
                if b is None:
                    return -1
                buf.append(b)
            b = buf[k]
            if b != c:
                return -1 if b < c else 1
        return 0


@dataclass
class LocateReport:
    positions: list[int]
    primary: int = 0
    duplicates: int = 0
    steps: int = 0
    splits: list[tuple[Range, Range]] = field(default_factory=list)


class Searcher:
    def __init__(self, tree: GrammarTree, extractor: Extractor, relation: BinaryRelation):
        self.tree = tree
        self.extractor = extractor
        self.relation = relation

    # -- binary searches ------------------------------------------------------

    def row_range(self, p1: bytes, memo: dict | None = None) -> Range:
        """Rows whose expansion ends with ``p1``."""
        if not p1:
            raise ValueError("empty pattern piece")
        tree = self.tree
        sym = tree.terminal_symbol(p1[-1])
        if sym is None:
            return EMPTY
        # rows ending with byte c run from the terminal rule X_c to the next terminal rule
        k = tree.y.rank1(sym)
        lo = sym
        hi = tree.y.select1(k + 1) - 1 if k < tree.y.ones else tree.n
        if len(p1) == 1:
            return lo, hi
        memo = {} if memo is None else memo
        key = p1[::-1]

        def cmp(x: int) -> int:
            lz = memo.get(x)
            if lz is None:
                lz = memo[x] = _Lazy(self.extractor.iter_suffix_reversed(x))
            return lz.compare(key)

        return _equal_range(cmp, lo, hi)

    def col_range(self, p2: bytes, memo: dict | None = None) -> Range:
        """Columns whose suffix expansion starts with ``p2``."""
        if not p2:
            raise ValueError("empty pattern piece")
        rel = self.relation
        if not rel.columns:
            return EMPTY
        topo = self.tree.topology
        memo = {} if memo is None else memo

        def cmp(c: int) -> int:
            lz = memo.get(c)
            if lz is None:
                v = topo.node(rel.labels[c - 1])
                lz = memo[c] = _Lazy(self.extractor.iter_siblings(v))
            return lz.compare(p2)

        return _equal_range(cmp, 1, rel.columns)

    def primary_occurrences(self, pattern: bytes, report: LocateReport | None = None) -> list[tuple[int, int]]:
        """``(label, split)`` for every primary occurrence; ``split = |P1|``."""
        out = []
        rows_memo: dict = {}
        cols_memo: dict = {}
        for i in range(1, len(pattern)):
            rr = self.row_range(pattern[:i], rows_memo)
            if rr[0] > rr[1]:
                continue
            cr = self.col_range(pattern[i:], cols_memo)
            if cr[0] > cr[1]:
                continue
            if report is not None:
                report.splits.append((rr, cr))
            for col, _ in self.relation.points(cr, rr):
                out.append((self.relation.labels[col - 1], i))
        return out

    # -- tracking ---------------------------------------------------------------

    def _climbs(self, v: int) -> list[tuple[int, int]]:
        """``(parent, start(c) - start(parent))`` for ``v`` and every other node labeled like ``v``."""
        tree = self.tree
        topo = tree.topology
        x = tree.label(v)
        out = []
        for j in range(1, tree.copies(x) + 1):
            c = v if j == 1 else topo.node(tree.label_select(x, j))
            par = topo.parent(c)
            out.append((par, tree.start_of(c) - tree.start_of(par)))
        return out

    def track(self, queue: list[tuple[int, int]], report: LocateReport) -> Iterator[int]:
        """Emit text positions for queued ``(v, l)``: an occurrence at offset ``l`` inside internal node ``v``.

        Climb data is memoized per node for the duration of one query, so a
        node reached with many offsets is decoded once.
        """
        root = self.tree.topology.root
        memo: dict[int, list[tuple[int, int]]] = {}
        while queue:
            v, l = queue.pop()
            report.steps += 1
            if v == root:
                yield 1 + l
                continue
            climbs = memo.get(v)
            if climbs is None:
                climbs = memo[v] = self._climbs(v)
            for par, delta in climbs:
                queue.append((par, l + delta))

    def locate_report(self, pattern: bytes) -> LocateReport:
        tree = self.tree
        topo = tree.topology
        report = LocateReport([])
        m = len(pattern)
        if m == 0 or m > tree.u or any(tree.terminal_symbol(b) is None for b in set(pattern)):
            return report
        queue: list[tuple[int, int]] = []
        if m == 1:
            a = tree.terminal_symbol(pattern[0])
            for j in range(1, tree.copies(a) + 1):
                c = topo.node(tree.label_select(a, j))
                par = topo.parent(c)
                if par is None:
                    queue.append((c, 0))
                else:
                    queue.append((par, tree.start_of(c) - tree.start_of(par)))
        else:
            prim = self.primary_occurrences(pattern, report)
            report.primary = len(prim)
            for label, i in prim:
                c = topo.node(label)
                par = topo.parent(c)
                queue.append((par, tree.start_of(c) - i - tree.start_of(par)))
        seen: set[int] = set()
        for pos in self.track(queue, report):
            if pos in seen:
                report.duplicates += 1
            seen.add(pos)
        report.positions = sorted(seen)
        return report

    def locate(self, pattern: bytes) -> list[int]:
        return self.locate_report(pattern).positions


def _equal_range(cmp, lo: int, hi: int) -> Range:
    """Maximal ``[a, b]`` within ``[lo, hi]`` where ``cmp == 0``, for ``cmp`` non-decreasing."""
    a, b = lo, hi + 1
    while a < b:
        mid = (a + b) >> 1
        if cmp(mid) < 0:
            a = mid + 1
        else:
            b = mid
    first = a
    b = hi + 1
    while a < b:
        mid = (a + b) >> 1
        if cmp(mid) <= 0:
            a = mid + 1
        else:
            b = mid
    return first, a - 1
