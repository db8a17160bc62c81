import json
import shutil
import subprocess
from pathlib import Path

import pytest

from shadowlat.cli import (BadInput, cmd_table, cmd_verify, corpus_names, load_lattice_file, main,
                           parse_lattice_file)

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, obj, name="L.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


D4_FILE = {"name": "D4", "N": 2, "gram": [[2, -1, 0, 0], [-1, 2, -1, -1], [0, -1, 2, 0], [0, -1, 0, 2]]}


def test_table_matches_golden_file(capsys):
    golden = (DATA / "table.txt").read_text(encoding="utf-8")
    assert cmd_table() == golden
    code, out, _ = run(capsys, "table")
    assert code == 0 and out == golden


def test_series_g2_level_three(capsys):
    code, out, _ = run(capsys, "series", "3", "g2", "--prec", "121")
    assert code == 0
    assert out.startswith("q - 6q² + 21q³")


def test_theta_and_decompose_of_d4(tmp_path, capsys):
    f = write(tmp_path, D4_FILE)
    code, out, _ = run(capsys, "theta", f)
    assert code == 0
    assert out.strip() == "1 + 24q² + 24q⁴ + 96q⁶ + 24q⁸ + O(q^(193/24))"
    code, out, _ = run(capsys, "decompose", f, "--json")
    data = json.loads(out)
    assert data["c"] == [1, -4] and data["m_shadow"] == 1


def test_exponents_are_reduced_fractions(capsys):
    code, out, _ = run(capsys, "series", "1", "s1", "--prec", "60", "--json")
    data = json.loads(out)
    assert data["terms"] == {"1/4": "2", "9/4": "2"}


def test_roots_and_aut(capsys):
    code, out, _ = run(capsys, "roots", "L_4_2")
    assert code == 0 and "D4 ⊥ A1⁴" in out
    code, out, _ = run(capsys, "aut", "L_3_5", "--json")
    assert json.loads(out)["order"] == 240


def test_isometric_command(tmp_path, capsys):
    a = write(tmp_path, {"name": "a", "N": 3, "gram": [[1, 0], [0, 3]]}, "a.json")
    b = write(tmp_path, {"name": "b", "N": 3, "gram": [[3, 0], [0, 1]]}, "b.json")
    code, out, _ = run(capsys, "isometric", a, b, "--json")
    data = json.loads(out)
    assert code == 0 and data["isometric"] and data["U"]


def test_corpus_listing(capsys):
    code, out, _ = run(capsys, "corpus")
    assert code == 0
    assert out.split() == corpus_names()
    assert "L_1_11" in corpus_names() and "L_7_2" in corpus_names()


# --- lattice files ---------------------------------------------------------------

@pytest.mark.parametrize("text", [
    "not json",
    '{"name": "x", "N": 2, "gram": [[2.0]]}',
    '{"name": "x", "N": 4, "gram": [[1]]}',
    '{"name": "x", "N": 2}',
    '{"name": "x", "N": 2, "gram": [[1, 2], [2, 1]]}',
    '{"name": "x", "N": 2, "gram": [[2]], "expected": {"min": 2}}',
])
def test_bad_files_rejected(text):
    with pytest.raises(BadInput):
        parse_lattice_file(text)


def test_bad_input_exit_code(tmp_path, capsys):
    f = write(tmp_path, '{"name": "x", "N": 2, "gram": [[1.5]]}')
    code, _, err = run(capsys, "verify", f)
    assert code == 3 and "error" in err
    code, _, _ = run(capsys, "theta", str(tmp_path / "missing.json"))
    assert code == 3


def test_every_expected_value_has_provenance():
    for name in corpus_names():
        lf = load_lattice_file(name)
        for key, val in lf.expected.items():
            if key == "known_flags" and not val:
                continue
            assert lf.provenance.get(key) in ("stated", "computed"), (name, key)


# --- verification ------------------------------------------------------------------

def test_verify_passing_lattice(capsys):
    code, out, _ = run(capsys, "verify", "L_2_3", "--json")
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "pass"
    names = [c["name"] for c in rep["checks"]]
    assert names[:4] == ["integral", "det", "rational_class", "strongly_modular"]
    assert {c["verdict"] for c in rep["checks"]} == {"pass"}


def test_verify_known_flag_is_not_a_failure(capsys):
    code, out, _ = run(capsys, "verify", "L_1_11", "--json")
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "known-flag"
    flagged = {c["name"] for c in rep["checks"] if c["verdict"] == "known-flag"}
    assert {"rational_class", "shadow_level"} <= flagged
    assert any("candidate_gram" in n for n in rep["notes"])
    assert rep["notes"][0]["candidate_gram"] == [[3, 1], [1, 4]]


def test_verify_mathematical_failure(tmp_path, capsys):
    # Z ⊥ √2 Z with a wrong stated minimum
    f = write(tmp_path, {"name": "C2", "N": 2, "gram": [[1, 0], [0, 2]], "expected": {"min": 2},
                         "provenance": {"min": "stated"}})
    code, out, _ = run(capsys, "verify", f, "--json")
    rep = json.loads(out)
    assert code == 1 and rep["status"] == "fail"


def test_verify_infrastructure_error(tmp_path, capsys):
    f = write(tmp_path, D4_FILE)
    code, out, _ = run(capsys, "verify", f, "--max-vectors", "10", "--json")
    rep = json.loads(out)
    assert code == 2 and rep["status"] == "error"


def test_reports_are_deterministic():
    lf = load_lattice_file("L_2_5")
    a = cmd_verify(lf).to_dict()
    b = cmd_verify(lf).to_dict()
    for d in (a, b):
        for c in d["checks"]:
            c.pop("seconds", None)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


@pytest.mark.skipif(shutil.which("shadowlat") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["shadowlat", "table"], capture_output=True, text=True, check=True).stdout
    assert out == (DATA / "table.txt").read_text(encoding="utf-8")
