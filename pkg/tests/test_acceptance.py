"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line."""

from __future__ import annotations

import contextlib
import io
import re
from collections import Counter

import pytest

from tdsforms import cli
from tdsforms.verify import run_suite


def _group(case_id: str) -> str:
    return re.sub(r"[-/]?\d{2,}$", "", case_id)


def _cases(report, *prefixes: str) -> list[dict]:
    return [c for c in report.to_json()["cases"] if _group(c["id"]).startswith(prefixes)]


def _announce(capsys, number: int, title: str, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'} {title}: {detail}")


def _all_pass(cases: list[dict]) -> bool:
    return bool(cases) and all(c["status"] == "pass" for c in cases)


def _failures(cases: list[dict]) -> list[dict]:
    return [c for c in cases if c["status"] != "pass"][:5]


@pytest.fixture(scope="module")
def algebra():
    return run_suite("algebra", seed=0, samples=200)


@pytest.fixture(scope="module")
def forms():
    return run_suite("forms", seed=0, samples=100)


@pytest.fixture(scope="module")
def psi_report():
    # 100 samples gives >= 50 instances per fixture for every psi check
    return run_suite("psi", seed=0, samples=100)


def test_criterion_1_exterior_algebra_laws(capsys, algebra):
    groups = ("skew", "assoc", "bilinear", "decomposable")
    counts = Counter(_group(c["id"]) for c in _cases(algebra, *groups))
    oracle = _cases(algebra, "oracle")
    cases = _cases(algebra, *groups) + oracle
    ok = _all_pass(cases) and all(counts[g] >= 200 for g in groups) and len(oracle) > 0
    _announce(capsys, 1, "exterior algebra laws", ok, f"{dict(counts)}, oracle={len(oracle)}")
    assert ok, _failures(cases)


def test_criterion_2_pullback_functoriality(capsys, algebra, forms):
    linear = _cases(algebra, "pullback-functor")
    poly = _cases(forms, "pullback-functor")
    wedge = _cases(algebra, "pullback-wedge") + _cases(forms, "pullback-wedge")
    cases = linear + poly + wedge
    ok = _all_pass(cases) and len(linear) >= 100 and len(poly) >= 50 and len(wedge) > 0
    _announce(capsys, 2, "pullback functoriality", ok, f"linear={len(linear)}, polynomial={len(poly)}, wedge={len(wedge)}")
    assert ok, _failures(cases)


def test_criterion_3_exterior_derivative(capsys, forms):
    dd, leibniz = _cases(forms, "dd"), _cases(forms, "leibniz")
    ok = _all_pass(dd + leibniz) and len(dd) >= 100 and len(leibniz) >= 100
    _announce(capsys, 3, "exterior derivative", ok, f"dd={len(dd)}, leibniz={len(leibniz)}")
    assert ok, _failures(dd + leibniz)


def test_criterion_4_chart_and_section_round_trips(capsys):
    report = run_suite("def21", seed=0, samples=64)
    cases = report.to_json()["cases"]
    needed = ["plane2-charts", "plane2-section", "plane2-independence", "sphere2-charts", "sphere2-section",
              "sphere2-independence"]
    counts = Counter(_group(c["id"]) for c in cases)
    ok = _all_pass(cases) and all(counts[g] > 0 for g in needed)
    _announce(capsys, 4, "chart/section/pointwise equivalence", ok,
              f"{report.summary['pass']}/{report.summary['total']} cases")
    assert ok, _failures(cases)


def test_criterion_5_psi_round_trip(capsys, psi_report):
    fixtures = ("euclidean:2", "euclidean:3", "atlas:plane2", "tangent_planes")
    counts = Counter(_group(c["id"]) for c in psi_report.to_json()["cases"])
    kinds = ("recover", "linear", "module", "compatibility", "tangent-condition")
    cases = _cases(psi_report, *kinds)
    ok = _all_pass(cases) and all(counts[f"{k}-{f}"] >= 50 for k in kinds for f in fixtures)
    smallest = min(counts[f"{k}-{f}"] for k in kinds for f in fixtures)
    _announce(capsys, 5, "psi and its inverse", ok, f"{len(cases)} cases, smallest group {smallest}")
    assert ok, _failures(cases)


def test_criterion_6_counterexamples(capsys):
    report = run_suite("counterexamples", seed=0, samples=64)
    cases = report.to_json()["cases"]
    counts = Counter(_group(c["id"]) for c in cases)
    ok = (_all_pass(cases) and counts["lines-transverse"] >= 20 and counts["meridian-field-integrable"] >= 10
          and counts["meridian-pole-+1"] == 1 and counts["meridian-pole--1"] == 1
          and counts["axes-no-pointwise-preimage"] == 1 and counts["axes-value-at-origin"] == 1
          and counts["lines-field"] > 0 and counts["meridian-field-nonzero-at-pole-fails"] == 1)
    _announce(capsys, 6, "counterexample battery", ok,
              f"lines points={counts['lines-transverse']}, meridian points={counts['meridian-field-integrable']}")
    assert ok, _failures(cases)


def test_criterion_7_free_module(capsys, psi_report):
    cases = _cases(psi_report, "law-R", "unique-R", "basis-R")
    dims = {_group(c["id"]).rsplit("-", 1)[1] for c in cases}
    ok = _all_pass(cases) and dims == {"R1", "R2", "R3"}
    _announce(capsys, 7, "free-module law", ok, f"{len(cases)} cases over {sorted(dims)}")
    assert ok, _failures(cases)


def _verify_all_stdout() -> tuple[int, str]:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(["verify", "all", "--seed", "7"])
    return code, buf.getvalue()


def test_criterion_8_determinism(capsys):
    code1, first = _verify_all_stdout()
    code2, second = _verify_all_stdout()
    ok = first == second and code1 == code2 == 0 and len(first) > 0
    _announce(capsys, 8, "deterministic verify all", ok, f"{len(first.encode())} bytes, exit {code1}")
    assert ok
