"""End-to-end acceptance run: ``hadss-lab verify`` at default settings.

One line per criterion is printed (``PASS``/``FAIL`` with the worst item) even
when pytest captures output.
"""

import json

import pytest

from hadss_lab.cli import main
from hadss_lab.suite import CRITERIA, DEFAULT_TOLERANCES

# Tolerances stated by the acceptance criteria; the suite must not loosen them.
STATED = {
    1: {"scalar_curvature": 1e-8},
    2: {"first_integral": 1e-10},
    3: {"root_residual": 1e-12, "round_trip": 1e-10},
    4: {"lambda1": 1e-3, "area_identity": 1e-3, "convergence_ratio": 3.5},
    5: {"hemisphere_spectrum": 5e-3},
    6: {"mass_constancy": 1e-6, "minimal_disk": 1e-8},
    7: {"normsq_h": 1e-9, "ricci_lambda": 2e-3, "gauss_curvature": 1e-6,
        "geodesic_curvature": 1e-6, "contact_angle": 1e-8,
        "gauss_bonnet": 1e-6},
    8: {"stability": 1e-10},
    9: {"second_variation": 1e-3, "mass_first_variation": 1e-3},
    10: {"h_prime": 5e-4, "reconstruction": 1e-6, "normalisation": 1e-12},
    11: {"lemma_residual": 1e-6},
    12: {},
}


@pytest.fixture(scope="module")
def reports(tmp_path_factory):
    base = tmp_path_factory.mktemp("verify")
    paths = [base / "run1.json", base / "run2.json"]
    codes = [main(["verify", "--out", str(p)]) for p in paths]
    raw = [p.read_bytes() for p in paths]
    return {"codes": codes, "raw": raw, "report": json.loads(raw[0])}


def _entry(report, cid):
    matches = [e for e in report["checks"] if e["id"] == cid]
    assert len(matches) == 1, f"criterion {cid} missing from report"
    return matches[0]


def _line(entry, extra=""):
    status = "PASS" if entry["passed"] else "FAIL"
    if "error" in entry:
        detail = entry["error"]
    else:
        bad = [it for it in entry["items"] if not it["passed"]]
        shown = bad[0] if bad else entry["items"][-1]
        detail = (f"{len(entry['items'])} items; "
                  f"{shown['label']} = {shown['measured']!r} "
                  f"({shown['relation']} {shown['tolerance']!r})")
    return f"criterion {entry['id']:>2} [{status}] {entry['name']}: {detail}{extra}"


def test_stated_tolerances_are_used(reports):
    used = reports["report"]["config"]["tolerances"]
    for cid, tols in STATED.items():
        for key, value in tols.items():
            assert DEFAULT_TOLERANCES[key] == value
            assert used[key] == value, (cid, key)


@pytest.mark.parametrize("cid", [c for c, _, _ in CRITERIA] + [12])
def test_criterion(reports, cid, capsys):
    entry = _entry(reports["report"], cid)
    extra = ""
    if cid == 12:
        same = reports["raw"][0] == reports["raw"][1]
        extra = f"; two CLI runs byte-identical: {same}"
        entry = dict(entry, passed=entry["passed"] and same)
    with capsys.disabled():
        print("\n" + _line(entry, extra))
    assert "error" not in entry, entry.get("error")
    assert entry["items"], "criterion produced no measurements"
    assert entry["passed"]


def test_verify_exit_code_and_size(reports):
    assert reports["codes"] == [0, 0]
    rep = reports["report"]
    assert rep["passed"] and rep["n_checks"] >= 12
