import json
import random
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from abelsheaf import cli, codec
from abelsheaf.errors import MalformedInput
from abelsheaf.examples import M22Point, StandardModuleSpec, m22_sheaf, remark42_sheaf, standard_sheaf
from abelsheaf.gf import make_field
from abelsheaf.motive import completion_at_infinity
from abelsheaf.series import INF, Poly, TruncSeries
from randmod import FIELDS, random_module

F2, F4 = make_field(2), make_field(2, 2)


def irrational_module_doc():
    S = m22_sheaf(M22Point(F4, 0, [[1, 2], [3, 1]]), 2)
    return codec.module_to_json(completion_at_infinity(S))


@pytest.fixture
def module_path(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps(irrational_module_doc()))
    return str(path)


# -- codec -------------------------------------------------------------------


def test_element_encoding():
    assert codec.encode_element(F4, 2) == [0, 1]
    assert codec.decode_element(F4, [1, 1]) == 3
    assert codec.decode_element(F4, 1) == 1
    for bad in ([2], [0, 0, 1], True, "1"):
        with pytest.raises(MalformedInput):
            codec.decode_element(F4, bad)


def test_series_encoding_forms():
    s = TruncSeries(F2, 0, [1, 0, 1])
    assert codec.encode_series(s) == [[1], [0], [1]]
    t = TruncSeries(F2, -1, [1], 3)
    assert codec.encode_series(t) == {"val": -1, "coeffs": [[1]], "prec": 3}
    with pytest.raises(MalformedInput):
        codec.decode_series(F2, {"val": 0, "coeffs": [1, 1, 1], "prec": 2})


@st.composite
def series_values(draw):
    p, e, _ = draw(st.sampled_from(FIELDS))
    F = make_field(p, e)
    coeffs = draw(st.lists(st.integers(0, F.order - 1), max_size=6))
    val = draw(st.integers(-3, 3))
    prec = draw(st.one_of(st.just(INF), st.integers(val + len(coeffs), val + len(coeffs) + 4)))
    return F, TruncSeries(F, val, coeffs, prec)


@given(series_values())
def test_series_round_trip(data):
    F, s = data
    back = codec.decode_series(F, json.loads(codec.dumps(codec.encode_series(s))))
    assert back == s and back.prec == s.prec


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_module_round_trip(seed):
    M = random_module(random.Random(seed))
    doc = json.loads(codec.dumps(codec.module_to_json(M)))
    codec.check_schema(doc, "module")
    N = codec.module_from_json(doc)
    assert N.field is M.field and N.q == M.q and N.dim == M.dim and N.U == M.U
    assert N.zeta == M.zeta and N.prec == M.prec
    assert codec.dumps(codec.module_to_json(N)) == codec.dumps(doc)


@pytest.mark.parametrize("S", [
    standard_sheaf(StandardModuleSpec(1, 2, 1, 2)),
    standard_sheaf(StandardModuleSpec(2, 3, 1, 3), zeta=1),
    m22_sheaf(M22Point(F4, 0, [[1, 2], [3, 1]]), 2),
    remark42_sheaf(1, Poly(F2, [0, 1, 1]), 2),
])
def test_sheaf_round_trip(S):
    doc = json.loads(codec.dumps(S.to_json()))
    codec.check_schema(doc, "sheaf")
    assert codec.sheaf_from_json(doc) == S


def test_schema_rejects_unknown_field():
    doc = irrational_module_doc()
    doc["colour"] = "red"
    with pytest.raises(MalformedInput):
        codec.module_from_json(doc)


def test_field_flags_fill_in_and_must_agree():
    doc = irrational_module_doc()
    del doc["field"], doc["q_ground"]
    M = codec.module_from_json(doc, F4, 2)
    assert M.field is F4 and M.q == 2
    with pytest.raises(MalformedInput):
        codec.module_from_json(doc)
    with pytest.raises(MalformedInput):
        codec.module_from_json(irrational_module_doc(), make_field(2, 4))


def test_rank_mismatch_rejected():
    doc = irrational_module_doc()
    doc["rank"] = 3
    with pytest.raises(MalformedInput):
        codec.module_from_json(doc)


# -- CLI ---------------------------------------------------------------------


def test_cli_newton_example(module_path):
    code, doc = cli.run(["newton", "--field", "2^2", "--q", "2", "--module", module_path])
    assert code == 0 and doc == {"slopes": [[0, 1], [2, 1]], "certified": True}


def test_cli_standard_check_example():
    code, doc = cli.run(["standard-check", "--k", "1", "--l", "2", "--e", "1", "--q", "2"])
    assert code == 0 and doc == {"F_pow_l_eq_zk": True, "newton_straight_line": True}


def test_cli_m22_scan_example():
    code, doc = cli.run(["m22-scan", "--q", "2", "--m", "2"])
    assert code == 0
    assert (doc["total"], doc["in_Z"], doc["pink_agrees"]) == (16, 10, True)


def test_cli_hodge_and_classify(module_path):
    code, doc = cli.run(["hodge", "--module", module_path])
    assert code == 0 and doc["slopes"] == [[0, 1], [2, 1]]
    code, doc = cli.run(["classify", "--module", module_path])
    assert code == 0 and doc == {"slopes": [[0, 1, 1], [2, 1, 1]], "isoclinic": False,
                                 "rank": 2, "dim": 2}


def test_cli_validate_module_and_sheaf(module_path):
    code, doc = cli.run(["validate", "--module", module_path])
    assert code == 0 and doc["valid"] and doc["kind"] == "module"
    sheaf = json.dumps(standard_sheaf(StandardModuleSpec(1, 2, 1, 2)).to_json())
    code, doc = cli.run(["validate", "--json", sheaf])
    assert code == 0 and doc["kind"] == "sheaf" and doc["valid"]


def test_cli_validation_failure_exit_2():
    bad = {"field": "2", "q_ground": "2", "dim": 2, "U": [[[1], []], [[], [0, 0, 0, 1]]]}
    code, doc = cli.run(["validate", "--json", json.dumps(bad)])
    assert code == 2 and doc["valid"] is False and doc["exponents"] == [0, 3]


def test_cli_insufficient_precision_exit_3(module_path):
    code, doc = cli.run(["newton", "--module", module_path, "--prec", "2"])
    assert code == 3
    assert doc["error"]["kind"] == "insufficient_precision" and doc["error"]["precision"] >= 2


@pytest.mark.parametrize("argv", [
    ["newton", "--module", "/nonexistent/m.json"],
    ["bogus"],
    ["newton", "--field", "2^3", "--module", "MODULE"],
    ["newton", "--json", "{not json"],
    ["newton", "--json", '{"dim": 1, "U": [[[0, 1]]], "extra": 1}'],
    ["newton", "--json", '{"dim": 1, "U": [[[0, 1]]]}'],
    ["m22-scan", "--q", "6", "--m", "1"],
    ["standard-check", "--k", "2", "--l", "4", "--q", "2"],
    ["tau-inv", "--json", "SHEAF", "--a", "[1]"],
])
def test_cli_malformed_exit_1(argv, module_path):
    sheaf = json.dumps(standard_sheaf(StandardModuleSpec(1, 2, 1, 2)).to_json())
    argv = [module_path if a == "MODULE" else sheaf if a == "SHEAF" else a for a in argv]
    code, doc = cli.run(argv)
    assert code == 1 and doc["error"]["kind"] == "malformed_input" and doc["error"]["message"]


def test_cli_isogeny_self(module_path):
    code, doc = cli.run(["isogeny", "--module", module_path, "--target", module_path, "--prec", "6"])
    assert code == 0 and doc["dimension"] >= 1 and doc["invertible"] is not None
    assert doc["prec"] == 6 and doc["h"] == 0


def test_cli_tau_inv():
    sheaf = json.dumps(standard_sheaf(StandardModuleSpec(1, 2, 1, 2)).to_json())
    code, doc = cli.run(["tau-inv", "--json", sheaf, "--a", "[[1], [1], [1]]", "--ext", "2"])
    assert code == 0 and doc["cardinality"] == doc["expected"] == 16


def test_cli_artin_schreier_sheaf():
    code, doc = cli.run(["ex96", "--q", "2", "--b", "[0, 1]"])
    assert code == 0 and doc["field"] == "2^2" and doc["isoclinic"]
    assert doc["report"]["relation"]


def test_main_writes_compact_sorted_json(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = cli.main(["standard-check", "--k", "1", "--l", "2", "--q", "2", "--out", str(out)])
    text = capsys.readouterr().out
    assert code == 0
    assert text == '{"F_pow_l_eq_zk":true,"newton_straight_line":true}\n'
    assert out.read_text() == text


def test_cli_output_is_deterministic(module_path, capsys):
    cli.main(["classify", "--module", module_path])
    a = capsys.readouterr().out
    cli.main(["classify", "--module", module_path])
    assert capsys.readouterr().out == a


def test_cli_corpus(tmp_path):
    code, doc = cli.run(["corpus", "--out", str(tmp_path)])
    assert code == 0 and "v1/standard.json" in doc["written"]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "abelsheaf.cli", "m22-scan", "--q", "2", "--m", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["in_Z"] == 4
    proc = subprocess.run([sys.executable, "-m", "abelsheaf.cli", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 1 and json.loads(proc.stdout)["error"]["kind"] == "malformed_input"
