"""Command-line interface. Text positions are 1-based.

Exit codes: 0 success, 1 query error, 2 format error (unreadable index,
malformed grammar file, missing input).
"""

from __future__ import annotations

import argparse
import binascii
import json
import sys

from .builder import read_grammar
from .grammar import GrammarError
from .index import SelfIndex, build_index
from .succinct import FormatError

EXIT_OK, EXIT_QUERY, EXIT_FORMAT = 0, 1, 2


class QueryError(Exception):
    pass


def _load(path: str) -> SelfIndex:
    try:
        return SelfIndex.load(path)
    except OSError as exc:
        raise FormatError(f"cannot read index {path}: {exc.strerror}") from exc


def cmd_build(args) -> int:
    try:
        if args.from_grammar:
            ix = build_index(grammar=read_grammar(args.input), epsilon=args.epsilon, delta=args.delta)
        else:
            with open(args.input, "rb") as f:
                text = f.read()
            if not text:
                raise FormatError("input text is empty")
            ix = build_index(text, epsilon=args.epsilon, delta=args.delta, min_freq=args.min_freq)
    except OSError as exc:
        raise FormatError(f"cannot read {args.input}: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise FormatError(f"grammar file is not ASCII: {exc}") from exc
    ix.save(args.output)
    st = ix.stats()
    print(f"indexed {st.u} bytes: n={st.n} N={st.N} size={st.bits_total // 8} bytes", file=sys.stderr)
    return EXIT_OK


def cmd_locate(args) -> int:
    ix = _load(args.index)
    if args.hex_pattern:
        try:
            pattern = binascii.unhexlify(args.pattern)
        except (binascii.Error, ValueError) as exc:
            raise QueryError(f"bad hex pattern: {exc}") from exc
    else:
        pattern = args.pattern.encode("utf-8", "surrogateescape")
    if not pattern:
        raise QueryError("empty pattern")
    out = sys.stdout
    for p in ix.locate(pattern):
        out.write(f"{p}\n")
    return EXIT_OK


def cmd_extract(args) -> int:
    ix = _load(args.index)
    try:
        data = ix.extract(args.pos, args.len)
    except (IndexError, ValueError) as exc:
        raise QueryError(str(exc)) from exc
    sys.stdout.flush()
    sys.stdout.buffer.write(data)
    sys.stdout.buffer.flush()
    return EXIT_OK


def cmd_stats(args) -> int:
    st = _load(args.index).stats().as_dict()
    if args.json:
        print(json.dumps(st))
    else:
        width = max(map(len, st))
        for k, v in st.items():
            print(f"{k:<{width}}  {v}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(_load(args.index)), host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _fraction(text: str) -> float:
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError("must be in (0, 1]")
    return v


def _min_freq(text: str) -> int:
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("must be at least 2")
    return v


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gcindex", description="Grammar-compressed self-index (1-based positions).")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="index a text file or a grammar file")
    b.add_argument("input")
    b.add_argument("-o", "--output", required=True, help="index file to write")
    b.add_argument("--from-grammar", action="store_true", help="input is a grammar in the T<d>/N<k> text format")
    b.add_argument("--min-freq", type=_min_freq, default=2, help="Re-Pair pair frequency threshold (default 2)")
    b.add_argument("--epsilon", type=_fraction, default=1.0, help="path-trie sampling fraction (default 1)")
    b.add_argument("--delta", type=_fraction, default=None, help="label permutation sampling fraction (default 1/lg n)")
    b.set_defaults(func=cmd_build)

    loc = sub.add_parser("locate", help="print every occurrence position of a pattern")
    loc.add_argument("index")
    loc.add_argument("pattern")
    loc.add_argument("--hex-pattern", action="store_true", help="pattern is given as hex bytes")
    loc.set_defaults(func=cmd_locate)

    ex = sub.add_parser("extract", help="write text[pos .. pos+len-1] to stdout")
    ex.add_argument("index")
    ex.add_argument("pos", type=int)
    ex.add_argument("len", type=int)
    ex.set_defaults(func=cmd_extract)

    st = sub.add_parser("stats", help="space and shape statistics")
    st.add_argument("index")
    st.add_argument("--json", action="store_true")
    st.set_defaults(func=cmd_stats)

    sv = sub.add_parser("serve", help="serve an index over HTTP")
    sv.add_argument("index")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8000)
    sv.set_defaults(func=cmd_serve)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except QueryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUERY
    except (FormatError, GrammarError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
