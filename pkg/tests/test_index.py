import json
import random
import struct

import pytest
from fastapi.testclient import TestClient

import corpora
from gcindex import FormatError, SelfIndex, build_index, repair_compress, write_grammar
from gcindex.cli import main
from gcindex.index import FORMAT_VERSION, MAGIC, SECTIONS
from gcindex.service import create_app
from oracles import occurrences

TEXT = b"alabaralalabarda"


@pytest.fixture(scope="module")
def sample():
    text = corpora.corpus("neardup", 4000)
    return text, build_index(text, epsilon=0.5, delta=0.5)


def section_offsets(data: bytes) -> list[tuple[int, int]]:
    """``(payload offset, payload size)`` per section."""
    out = []
    pos = len(MAGIC) + 1
    for _ in SECTIONS:
        (size,) = struct.unpack_from("<Q", data, pos)
        out.append((pos + 8, size))
        pos += 8 + size + 8
    return out


def test_roundtrip_answers(sample, tmp_path):
    text, ix = sample
    path = tmp_path / "x.gcix"
    ix.save(path)
    back = SelfIndex.load(path)
    rng = random.Random(1)
    for pat in corpora.patterns(text, rng, 100):
        assert back.locate(pat) == ix.locate(pat) == occurrences(text, pat)
    for _ in range(100):
        p = rng.randint(1, len(text))
        k = rng.randint(0, len(text) - p + 1)
        assert back.extract(p, k) == text[p - 1:p - 1 + k]
    assert back.params == ix.params
    assert back.stats() == ix.stats()


def test_reserialization_identical(sample):
    _, ix = sample
    data = ix.to_bytes()
    assert SelfIndex.from_bytes(data).to_bytes() == data


def test_build_deterministic():
    text = corpora.corpus("english", 3000)
    assert build_index(text).to_bytes() == build_index(text).to_bytes()


def test_bad_magic(sample):
    data = bytearray(sample[1].to_bytes())
    data[0:4] = b"NOPE"
    with pytest.raises(FormatError, match="bad magic"):
        SelfIndex.from_bytes(bytes(data))


def test_version_mismatch(sample):
    data = bytearray(sample[1].to_bytes())
    data[4] = FORMAT_VERSION + 1
    with pytest.raises(FormatError, match="version mismatch"):
        SelfIndex.from_bytes(bytes(data))


@pytest.mark.parametrize("k", range(len(SECTIONS)))
def test_checksum_per_section(sample, k):
    data = bytearray(sample[1].to_bytes())
    off, size = section_offsets(bytes(data))[k]
    assert size > 0
    data[off + size // 2] ^= 0x40
    with pytest.raises(FormatError, match=f"checksum mismatch in section '{SECTIONS[k]}'"):
        SelfIndex.from_bytes(bytes(data))


@pytest.mark.parametrize("k", range(len(SECTIONS)))
def test_truncation_per_section(sample, k):
    data = sample[1].to_bytes()
    off, size = section_offsets(data)[k]
    with pytest.raises(FormatError, match=f"truncated section '{SECTIONS[k]}'"):
        SelfIndex.from_bytes(data[:off + size // 2])


def test_trailing_bytes(sample):
    with pytest.raises(FormatError, match="trailing"):
        SelfIndex.from_bytes(sample[1].to_bytes() + b"\0")


def test_empty_file():
    with pytest.raises(FormatError):
        SelfIndex.from_bytes(b"")


def test_stats_fields():
    ix = build_index(TEXT)
    st = ix.stats()
    assert st.u == 16 and st.sigma == 5
    assert st.relation_columns == st.N + st.sigma - st.n
    assert st.bits_total == 8 * len(ix.to_bytes())
    parts = [v for k, v in st.as_dict().items() if k.startswith("bits_") and k not in ("bits_total", "bits_overhead", "bits_per_symbol")]
    assert sum(parts) + st.bits_overhead == st.bits_total
    assert st.parse_height >= st.height >= 1


def test_build_from_grammar_matches_text():
    text = corpora.corpus("dna", 2000)
    a = build_index(text)
    b = build_index(grammar=repair_compress(text))
    assert a.locate(b"acgt") == b.locate(b"acgt")
    with pytest.raises(ValueError):
        build_index()


# -- CLI -----------------------------------------------------------------------

@pytest.fixture()
def built(tmp_path):
    src = tmp_path / "in.txt"
    src.write_bytes(TEXT)
    out = tmp_path / "ix.gcix"
    assert main(["build", str(src), "-o", str(out)]) == 0
    return out


def test_cli_locate(built, capsys):
    assert main(["locate", str(built), "bar"]) == 0
    assert capsys.readouterr().out == "4\n12\n"
    assert main(["locate", str(built), "626172", "--hex-pattern"]) == 0
    assert capsys.readouterr().out == "4\n12\n"
    assert main(["locate", str(built), "zzz"]) == 0
    assert capsys.readouterr().out == ""


def test_cli_extract(built, capfdbinary):
    assert main(["extract", str(built), "4", "3"]) == 0
    assert capfdbinary.readouterr().out == b"bar"


def test_cli_stats(built, capsys):
    assert main(["stats", str(built), "--json"]) == 0
    st = json.loads(capsys.readouterr().out)
    assert st["u"] == 16 and all(isinstance(v, (int, float)) for v in st.values())
    assert main(["stats", str(built)]) == 0
    assert "bits_total" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [["extract", "{ix}", "15", "5"], ["extract", "{ix}", "0", "1"],
                                  ["locate", "{ix}", "zz", "--hex-pattern"], ["locate", "{ix}", ""]])
def test_cli_query_errors(built, argv):
    assert main([a.format(ix=built) for a in argv]) == 1


def test_cli_format_errors(built, tmp_path):
    data = built.read_bytes()
    bad = tmp_path / "bad.gcix"
    bad.write_bytes(data[:-3])
    assert main(["locate", str(bad), "a"]) == 2
    assert main(["stats", str(tmp_path / "missing.gcix")]) == 2
    g = tmp_path / "g.txt"
    g.write_text("T97\nN1 N9\n")
    assert main(["build", str(g), "-o", str(tmp_path / "o"), "--from-grammar"]) == 2
    empty = tmp_path / "empty"
    empty.write_bytes(b"")
    assert main(["build", str(empty), "-o", str(tmp_path / "o")]) == 2


def test_cli_from_grammar(tmp_path, capsys):
    g = tmp_path / "g.txt"
    write_grammar(repair_compress(TEXT), g)
    out = tmp_path / "g.gcix"
    assert main(["build", str(g), "-o", str(out), "--from-grammar", "--epsilon", "0.5", "--delta", "0.25"]) == 0
    assert main(["locate", str(out), "la"]) == 0
    assert capsys.readouterr().out.split() == ["2", "8", "10"]


def test_cli_bad_parameters(tmp_path):
    src = tmp_path / "in.txt"
    src.write_bytes(TEXT)
    for flag, value in (("--epsilon", "2"), ("--delta", "0"), ("--min-freq", "1")):
        with pytest.raises(SystemExit) as info:
            main(["build", str(src), "-o", str(tmp_path / "o"), flag, value])
        assert info.value.code == 2


# -- HTTP service --------------------------------------------------------------

def test_service():
    client = TestClient(create_app(build_index(TEXT)))
    res = client.post("/locate", json={"pattern": "bar"})
    assert res.status_code == 200 and res.json() == {"count": 2, "positions": [4, 12]}
    res = client.post("/locate", json={"pattern": "6c61", "hex": True})
    assert res.json()["positions"] == [2, 8, 10]
    assert client.post("/locate", json={"pattern": "xyz", "hex": True}).status_code == 400
    assert client.post("/locate", json={"pattern": ""}).status_code == 422
    res = client.post("/extract", json={"pos": 4, "length": 3})
    assert res.json() == {"hex": "626172", "text": "bar"}
    assert client.post("/extract", json={"pos": 15, "length": 9}).status_code == 400
    assert client.post("/extract", json={"pos": 0, "length": 1}).status_code == 422
    stats = client.get("/stats").json()
    assert stats["u"] == 16 and isinstance(stats["N"], int)
