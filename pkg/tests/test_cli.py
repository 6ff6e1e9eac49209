import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from oracles import random_system
from wicksys import statespace
from wicksys.cli import parse_complex, run
from wicksys.multiindex import TruncationSpec
from wicksys.ring import RingElement
from wicksys.ringmatrix import RingMatrix
from wicksys.serialization import (
    element_doc_from_dict,
    element_doc_to_dict,
    signal_from_dict,
    signal_to_dict,
    system_from_dict,
    system_to_dict,
)
from wicksys.statespace import StateSpaceSystem, tf_eval

SPEC = TruncationSpec(1, 6)
ONE = RingElement.one(SPEC)
ZERO = RingElement.zero(SPEC)
Z1 = RingElement.variable(SPEC, 1)


def scalar(a, b, c, d):
    return StateSpaceSystem(*(RingMatrix.from_entries([[x]]) for x in (a, b, c, d)))


def call(*argv):
    out = io.StringIO()
    code = run([str(a) for a in argv], out)
    return code, out.getvalue()


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def geometric(tmp_path):
    return write(tmp_path, "geo.json", system_to_dict(scalar(Z1, ONE, ONE, ZERO)))


@pytest.mark.parametrize(
    "text, value",
    [("1", 1), ("0.5", 0.5), ("1+2i", 1 + 2j), ("-3.5-0.25i", -3.5 - 0.25j), ("2j", 2j), ("i", 1j), ("-i", -1j), ("1e-3+1e-2i", 1e-3 + 1e-2j)],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_tfeval_geometric(geometric):
    code, out = call("tfeval", "--system", geometric, "--zeta", "0.5", "--z", "0.5")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "row,col,re,im"
    row, col, re, im = lines[1].split(",")
    assert (row, col) == ("0", "0")
    assert abs(float(re) - 2 / 3) < 1e-15 and float(im) == 0


def test_tfeval_singular_is_math_error(tmp_path):
    path = write(tmp_path, "s.json", system_to_dict(scalar(ONE * 2, ONE, ONE, ZERO)))
    code, out = call("tfeval", "--system", path, "--zeta", "0.5", "--z", "0")
    assert code == 3
    assert json.loads(out)["error"]["kind"] == "SingularAtPoint"


def test_check_counterexample(tmp_path):
    path = write(tmp_path, "cx.json", system_to_dict(scalar(ONE, ONE, Z1, ZERO)))
    code, out = call("check", "obs", "--system", path)
    assert code == 0
    doc = json.loads(out)
    assert doc["property"] == "Observable"
    assert doc["verdict"] == "SufficientNonzeroMinor"
    assert doc["witness"]["kalman_rank_at_zero"] == 0
    for which, verdict in [("ctrl", "SufficientAtZero"), ("rctrl", "SufficientAtZero"), ("minimal", "SufficientNonzeroMinor")]:
        code, out = call("check", which, "--system", path)
        assert code == 0 and json.loads(out)["verdict"] == verdict


def test_vage():
    code, out = call("vage", "--k", 4, "--l", 2)
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["value"] - math.pi / 2) < 1e-9
    assert f"{doc['value']:.10f}" == "1.5707963268"
    code, out = call("vage", "--k", 3, "--l", 2)
    assert code == 3 and json.loads(out)["error"]["kind"] == "DivergentConstant"


def test_kq():
    code, out = call("kq", "--z", "0.1,0.01", "--q", 2, "--delta", 1)
    assert code == 0
    doc = json.loads(out)
    want = 1 / (1 - 0.01 * 4) / (1 - 1e-4 * 16) - 1
    assert doc["member"] and not doc["divergent"] and abs(doc["sum"] - want) < 1e-14
    code, out = call("kq", "--z", "0.5", "--q", 2, "--delta", 1)
    assert code == 0
    assert json.loads(out) == {"member": False, "sum": None, "divergent": True}
    code, _ = call("kq", "--z", "0.1", "--q", 2, "--delta", 0)
    assert code == 2


def test_norm(tmp_path):
    f = ONE + Z1 * 3
    path = write(tmp_path, "f.json", element_doc_to_dict(f))
    code, out = call("norm", "--element", path, "--k", 2)
    assert code == 0
    assert abs(json.loads(out)["norm"] - math.sqrt(1 + 9 / 4)) < 1e-14


def test_markov(geometric):
    code, out = call("markov", "--system", geometric, "--n", 3)
    assert code == 0
    doc = json.loads(out)
    assert doc["truncation"] == {"num_vars": 1, "max_degree": 6}
    terms = [h["entries"][0][0]["terms"] for h in doc["markov"]]
    assert terms[0] == [] and terms[1] == [{"alpha": [0], "re": 1.0, "im": 0.0}]
    assert terms[3] == [{"alpha": [2], "re": 1.0, "im": 0.0}]


def test_simulate(tmp_path, geometric):
    sig = write(tmp_path, "u.json", signal_to_dict([RingMatrix.from_entries([[ONE]])], SPEC))
    out_path = tmp_path / "sim.json"
    code, out = call("simulate", "--system", geometric, "--input", sig, "--steps", 4, "--out", out_path)
    assert code == 0 and out == ""
    doc = json.loads(out_path.read_text())
    assert len(doc["states"]) == 5 and len(doc["outputs"]) == 4
    assert doc["outputs"][3]["entries"][0][0]["terms"] == [{"alpha": [2], "re": 1.0, "im": 0.0}]


def test_simulate_accepts_plain_list_vectors(tmp_path, geometric):
    sig = write(tmp_path, "u.json", {"truncation": {"num_vars": 1, "max_degree": 6}, "signal": [[1.0], [0.0]]})
    code, out = call("simulate", "--system", geometric, "--input", sig)
    assert code == 0 and len(json.loads(out)["outputs"]) == 2


@pytest.mark.parametrize("op", ["inverse", "cascade", "sum", "rows", "cols"])
def test_realize_round_trip(tmp_path, op):
    rng = np.random.default_rng(0)
    spec = TruncationSpec(2, 4)
    s1 = random_system(rng, spec, 2, 1, 1)
    s1 = StateSpaceSystem(s1.A, s1.B, s1.C, RingMatrix.identity(spec, 1))
    s2 = random_system(rng, spec, 1, 1, 1)
    p1, p2 = write(tmp_path, "s1.json", system_to_dict(s1)), write(tmp_path, "s2.json", system_to_dict(s2))
    out_path = tmp_path / "r.json"
    code, _ = call("realize", op, "--system", p1, "--system2", p2, "--out", out_path)
    assert code == 0
    reparsed = system_from_dict(json.loads(out_path.read_text()))
    direct = {
        "inverse": lambda: statespace.realize_inverse(s1),
        "cascade": lambda: statespace.realize_cascade(s1, s2),
        "sum": lambda: statespace.realize_sum(s1, s2),
        "rows": lambda: statespace.realize_concat_rows(s1, s2),
        "cols": lambda: statespace.realize_concat_cols(s1, s2),
    }[op]()
    for zeta, z in [(0.1, [0.2, 0.1]), (-0.3 + 0.2j, [0.05j, -0.1])]:
        np.testing.assert_allclose(tf_eval(reparsed, zeta, z), tf_eval(direct, zeta, z), rtol=0, atol=1e-12)
    call("realize", op, "--system", p1, "--system2", p2, "--out", tmp_path / "r2.json")
    assert (tmp_path / "r2.json").read_bytes() == out_path.read_bytes()


def test_realize_inverse_not_invertible(tmp_path):
    path = write(tmp_path, "s.json", system_to_dict(scalar(ONE, ONE, ONE, Z1)))
    code, out = call("realize", "inverse", "--system", path)
    assert code == 3 and json.loads(out)["error"]["kind"] == "NotInvertible"


def test_realize_needs_second_system(geometric):
    code, out = call("realize", "sum", "--system", geometric)
    assert code == 2 and json.loads(out)["error"]["kind"] == "ValidationError"


def test_deterministic_output(geometric):
    outs = {call("markov", "--system", geometric, "--n", 5)[1] for _ in range(3)}
    assert len(outs) == 1


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["tfeval", "--system", "x.json", "--zeta", "abc", "--z", "0"],
        ["markov", "--system", "/nonexistent.json", "--n", "2"],
        ["vage", "--k", "four", "--l", "2"],
        ["check", "sideways", "--system", "x.json"],
    ],
)
def test_validation_errors(argv):
    code, out = call(*argv)
    assert code == 2
    assert json.loads(out)["error"]["kind"] == "ValidationError"


def test_schema_errors(tmp_path):
    bad = system_to_dict(scalar(Z1, ONE, ONE, ZERO))
    bad["dims"]["state"] = 2
    code, out = call("markov", "--system", write(tmp_path, "a.json", bad), "--n", 1)
    assert code == 2
    bad = system_to_dict(scalar(Z1, ONE, ONE, ZERO))
    bad["A"]["entries"][0][0] = {"terms": [{"alpha": [7], "re": 1.0, "im": 0.0}]}
    code, out = call("markov", "--system", write(tmp_path, "b.json", bad), "--n", 1)
    assert code == 2 and "max_degree" in json.loads(out)["error"]["detail"]
    path = tmp_path / "c.json"
    path.write_text("{not json")
    assert call("markov", "--system", path, "--n", 1)[0] == 2


def test_serialization_round_trips():
    rng = np.random.default_rng(3)
    spec = TruncationSpec(3, 3)
    s = random_system(rng, spec, 2, 2, 1)
    assert system_from_dict(json.loads(json.dumps(system_to_dict(s)))) == s
    f = s.A[0, 1]
    assert element_doc_from_dict(json.loads(json.dumps(element_doc_to_dict(f)))) == f
    sig = [s.B[:, 0:1], s.B[:, 1:2]]
    back = signal_from_dict(json.loads(json.dumps(signal_to_dict(sig, spec))))
    assert all(a == b for a, b in zip(back, sig))


def test_module_entry_point(geometric):
    proc = subprocess.run(
        [sys.executable, "-m", "wicksys", "tfeval", "--system", str(geometric), "--zeta", "0.5", "--z", "0.5"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].startswith("0,0,0.666666666666")
