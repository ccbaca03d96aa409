"""Re-Pair style grammar construction and the grammar text format.

The text format has one rule per line: line ``k`` (comments excluded)
defines nonterminal ``k``, tokens are ``T<d>`` for byte ``d`` and ``N<k>``
for nonterminal ``k``, separated by single spaces. The last rule is the
start symbol. Lines beginning with ``#`` are comments and do not count.
"""

from __future__ import annotations

import heapq
import os
from dataclasses import dataclass, field

from .grammar import Grammar, GrammarError, terminal, terminal_byte

Pair = tuple[int, int]


def _order(pr: Pair) -> tuple[int, int]:
    """Tie-break key: bytes by value, then nonterminals by id."""
    a, b = pr
    return (-a - 1 if a < 0 else 255 + a, -b - 1 if b < 0 else 255 + b)


class GrammarParseError(GrammarError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class PairingState:
    """Sequence as a doubly linked list plus the occurrence sets of every adjacent pair."""

    sym: list[int | None]
    nxt: list[int]
    prv: list[int]
    occ: dict[Pair, set[int]] = field(default_factory=dict)
    log: list[Pair] = field(default_factory=list)

    @classmethod
    def from_text(cls, text: bytes) -> "PairingState":
        n = len(text)
        st = cls([terminal(b) for b in text], list(range(1, n + 1)), list(range(-1, n - 1)))
        st.nxt[-1] = -1
        for i in range(n - 1):
            st.occ.setdefault((st.sym[i], st.sym[i + 1]), set()).add(i)
        return st

    def pair_at(self, i: int) -> Pair | None:
        j = self.nxt[i] if i >= 0 else -1
        if i < 0 or j < 0:
            return None
        return self.sym[i], self.sym[j]  # type: ignore[return-value]

    def _drop(self, i: int) -> None:
        pr = self.pair_at(i)
        if pr is not None:
            s = self.occ.get(pr)
            if s is not None:
                s.discard(i)

    def _add(self, i: int, touched: set[Pair]) -> None:
        pr = self.pair_at(i)
        if pr is not None:
            self.occ.setdefault(pr, set()).add(i)
            touched.add(pr)

    def usable(self, pr: Pair) -> list[int]:
        """Left-to-right non-overlapping occurrences of ``pr``."""
        out = []
        last = -2
        for i in sorted(self.occ.get(pr, ())):
            if self.pair_at(i) != pr:
                continue
            if pr[0] == pr[1] and last >= 0 and self.nxt[last] == i:
                continue
            out.append(i)
            last = i
        return out

    def replace(self, pr: Pair, new: int) -> set[Pair]:
        """Replace every non-overlapping occurrence of ``pr`` by ``new``; return pairs that gained occurrences."""
        touched: set[Pair] = set()
        self.log.append(pr)
        for i in self.usable(pr):
            if self.pair_at(i) != pr:
                continue
            j = self.nxt[i]
            p, q = self.prv[i], self.nxt[j]
            if p >= 0:
                self._drop(p)
            self._drop(j)
            self._drop(i)
            self.sym[i] = new
            self.sym[j] = None
            self.nxt[i] = q
            if q >= 0:
                self.prv[q] = i
            if p >= 0:
                self._add(p, touched)
            self._add(i, touched)
        self.occ.pop(pr, None)
        return touched

    def sequence(self) -> list[int]:
        out = []
        i = 0
        while i >= 0:
            out.append(self.sym[i])
            i = self.nxt[i]
        return out  # type: ignore[return-value]


def repair_compress(text: bytes, min_freq: int = 2) -> Grammar:
    """Replace a most frequent pair until none occurs ``min_freq`` times; ties go to the smallest pair."""
    if not text:
        raise ValueError("cannot build a grammar for an empty text")
    if min_freq < 2:
        raise ValueError("min_freq must be at least 2")
    st = PairingState.from_text(text)
    rules: list[tuple[int, ...]] = []
    heap = [(-len(s), _order(pr), pr) for pr, s in st.occ.items() if len(s) >= min_freq]
    heapq.heapify(heap)
    # exact non-overlapping counts, valid while the raw occurrence count is unchanged
    exact: dict[Pair, tuple[int, int]] = {}
    while heap:
        key, _, pr = heapq.heappop(heap)
        key = -key
        raw = len(st.occ.get(pr, ()))
        if key != raw and exact.get(pr) != (key, raw):
            if raw >= min_freq:
                heapq.heappush(heap, (-raw, _order(pr), pr))
            continue
        if key == raw and pr[0] == pr[1]:
            c = len(st.usable(pr))
            if c < raw:
                exact[pr] = (c, raw)
                if c >= min_freq:
                    heapq.heappush(heap, (-c, _order(pr), pr))
                continue
        if key < min_freq:
            continue
        rules.append(pr)
        touched = st.replace(pr, len(rules))
        exact.pop(pr, None)
        for t in touched:
            c = len(st.occ.get(t, ()))
            if c >= min_freq:
                heapq.heappush(heap, (-c, _order(t), t))
    seq = st.sequence()
    if len(seq) == 1 and seq[0] > 0:
        return Grammar(rules, seq[0])
    rules.append(tuple(seq))
    return Grammar(rules, len(rules))


# -- text format --------------------------------------------------------------

def format_grammar(g: Grammar) -> str:
    """Serialize ``g``; the start rule is moved last by swapping ids if needed."""
    if g.start != g.n:
        order = [k for k in range(1, g.n + 1) if k != g.start] + [g.start]
        new_id = {old: new for new, old in enumerate(order, 1)}
        rules = [tuple(t if t < 0 else new_id[t] for t in g.rules[old - 1]) for old in order]
    else:
        rules = g.rules
    lines = [" ".join(f"T{terminal_byte(t)}" if t < 0 else f"N{t}" for t in rhs) for rhs in rules]
    return "\n".join(lines) + "\n"


def parse_grammar(source: str) -> Grammar:
    rules: list[tuple[int, ...]] = []
    refs: list[tuple[int, int]] = []  # (largest N<k> on the line, line number)
    for lineno, line in enumerate(source.splitlines(), 1):
        if line.startswith("#"):
            continue
        if not line.strip():
            if line:
                raise GrammarParseError("blank rule", lineno)
            continue
        rhs = []
        top = 0
        for tok in line.split(" "):
            if len(tok) < 2 or tok[0] not in "TN" or not tok[1:].isdigit():
                raise GrammarParseError(f"malformed token {tok!r}", lineno)
            v = int(tok[1:])
            if tok[0] == "T":
                if v > 255:
                    raise GrammarParseError(f"terminal {tok} outside 0..255", lineno)
                rhs.append(terminal(v))
            else:
                if v == 0:
                    raise GrammarParseError("nonterminals are numbered from 1", lineno)
                rhs.append(v)
                top = max(top, v)
        rules.append(tuple(rhs))
        refs.append((top, lineno))
    if not rules:
        raise GrammarParseError("no rules", 1)
    for top, lineno in refs:
        if top > len(rules):
            raise GrammarParseError(f"reference to N{top} but only {len(rules)} rules", lineno)
    return Grammar(rules, len(rules))


def read_grammar(path: str | os.PathLike) -> Grammar:
    with open(path, encoding="ascii") as f:
        return parse_grammar(f.read())


def write_grammar(g: Grammar, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii") as f:
        f.write(format_grammar(g))
