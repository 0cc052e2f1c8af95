import numpy as np
from mapzoo import R3, coupled_expansion, linear_saddle, twisted_cubic

from saddlekit.certify import CertifyConfig, certify
from saddlekit.manifolds import grow_unstable
from saddlekit.fixedpoints import classify_local
from saddlekit.reporting import (
    CERT_SCHEMA,
    certificate_lines,
    certificate_text,
    g17,
    polyline_csv_lines,
    write_lines,
)


def test_g17_round_trips_doubles():
    for v in (1 / 3, 0.1, 2.0, -1.2345678901234567e-8, 1e300):
        assert float(g17(v)) == v
    assert g17(2.0) == "2"  # %.17g drops trailing noise for exact values


def _cert(m=None, config=None):
    return certify(m or coupled_expansion(), R3, config or CertifyConfig())


def test_certificate_lines_schema_and_order():
    lines = certificate_lines(_cert(config=CertifyConfig(declared_symmetry="D2", epsilon=1.0)))
    assert lines[0] == f"schema = {CERT_SCHEMA}"
    keys = [ln.split(" = ")[0] for ln in lines]
    assert keys.index("map") < keys.index("verdict") < keys.index("rule")
    assert "region.x0" in keys and "hypothesis.count" in keys
    # every line is exactly "key = value"
    assert all(" = " in ln and len(ln.split(" = ", 1)) == 2 for ln in lines)
    # hypothesis blocks are contiguous and indexed from 0
    hyp = [k for k in keys if k.startswith("hypothesis.") and k.endswith(".id")]
    assert hyp == [f"hypothesis.{i}.id" for i in range(len(hyp))]


def test_certificate_lines_byte_stable_across_runs():
    config = CertifyConfig(declared_symmetry="D2", epsilon=1.0)
    a = "\n".join(certificate_lines(_cert(config=config)))
    b = "\n".join(certificate_lines(_cert(config=config)))
    assert a == b


def test_certificate_lines_cover_refusal_with_witness():
    lines = certificate_lines(_cert(twisted_cubic()))
    txt = "\n".join(lines)
    assert "verdict = NOT_CERTIFIED" in txt
    assert "rule = -" in txt
    assert "witness" in txt  # refuted hypotheses carry their witness point
    assert "blocked." in txt


def test_certificate_text_mentions_region_honesty():
    out = certificate_text(_cert())
    assert any("sample-based statements" in ln for ln in out)
    assert out[0].startswith("== certificate:")


def test_polyline_csv_shape_and_precision():
    rec = classify_local(linear_saddle(), (0.0, 0.0))
    plus, minus = grow_unstable(linear_saddle(), rec, budget=10.0)
    lines = polyline_csv_lines([plus, minus])
    assert lines[0] == "branch,idx,x,y"
    first = lines[1].split(",")
    assert first[0] == "UNSTABLE_PLUS" and first[1] == "0"
    # numbers re-read to full double precision
    pt = plus.points[0]
    assert float(first[2]) == pt[0] and float(first[3]) == pt[1]
    # idx restarts at 0 for each branch
    starts = [ln.split(",")[:2] for ln in lines[1:] if ln.split(",")[1] == "0"]
    assert len(starts) == 2


def test_write_lines_is_lf_terminated(tmp_path):
    path = tmp_path / "out.txt"
    write_lines(path, ["a", "b"])
    data = path.read_bytes()
    assert data == b"a\nb\n"
