from __future__ import annotations

import json
from pathlib import Path

import pytest

from tdsforms.cli import main, parse_number
from tdsforms.errors import SchemaError


def _write(path: Path, payload) -> str:
    path.write_text(json.dumps(payload))
    return str(path)


def test_eval_exterior_form(tmp_path, capsys):
    form = _write(tmp_path / "f.json", {"dim": 2, "degree": 2, "coeffs": [{"idx": [0, 1], "num": 1, "den": 1}]})
    inp = _write(tmp_path / "in.json", {"vectors": [[1, 0], [0, 1]]})
    assert main(["eval", form, inp]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == {"num": 1, "den": 1}


def test_eval_differential_form_at_point(tmp_path, capsys):
    form = _write(tmp_path / "f.json", {"dim": 2, "degree": 1, "coeffs": [{"idx": [1], "expr": "x0^2 + 1/2"}]})
    inp = _write(tmp_path / "in.json", {"point": ["1/2", 0], "vectors": [[5, "2/3"]]})
    assert main(["eval", form, inp]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == {"num": 1, "den": 2}


def test_eval_outside_domain_exits_3(tmp_path, capsys):
    form = _write(tmp_path / "f.json", {"dim": 1, "degree": 1, "domain": {"lo": [-1], "hi": [1]},
                                        "coeffs": [{"idx": [0], "expr": "x0"}]})
    inp = _write(tmp_path / "in.json", {"point": [2], "vectors": [[1]]})
    assert main(["eval", form, inp]) == 3
    assert "DomainError" in capsys.readouterr().err


def test_usage_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    inp = _write(tmp_path / "in.json", {"vectors": [[1]]})
    assert main(["eval", str(bad), inp]) == 2
    assert main(["verify", "nonsense"]) == 2
    form = _write(tmp_path / "f.json", {"dim": 1, "degree": 1, "coeffs": [{"idx": [0], "expr": "x0 +"}]})
    assert main(["eval", form, inp]) == 2


def test_probe_lines_reports_obstruction(tmp_path, capsys):
    p1 = _write(tmp_path / "p1.json", {"vars": 1, "components": ["x0", "0"]})
    p2 = _write(tmp_path / "p2.json", {"vars": 1, "components": ["0", "x0"]})
    assert main(["probe", "lines", p1, p2]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["found"] is False
    assert out["certificate"]["reason"].startswith("line-direction obstruction")
    assert main(["probe", "euclidean:2", p1, p2, "--mode", "weak"]) == 0
    assert json.loads(capsys.readouterr().out)["found"] is True


def test_verify_suite_json(capsys):
    assert main(["verify", "def21", "--seed", "1", "--samples", "16"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["suite"] == "def21" and report["seed"] == 1
    assert report["summary"]["fail"] == 0 and report["summary"]["error"] == 0


def test_parse_number():
    assert parse_number("3/4") == parse_number({"num": 3, "den": 4})
    assert parse_number(0.25) == 0.25
    with pytest.raises(SchemaError):
        parse_number(True)
    with pytest.raises(SchemaError):
        parse_number({"num": 1, "den": 0})
