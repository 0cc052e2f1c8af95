"""Shared pytest hooks.

The tests in ``test_acceptance.py`` are named ``test_criterion_<n>[_facet]``;
the hooks below collect their outcomes and print one verdict line per numbered
criterion at the end of the run, so the acceptance record is readable even in
a plain ``pytest -v`` log.  A criterion whose only failures are strict-xfail
tests shows up as PARTIAL: the limitation is on record, not papered over.
"""

from __future__ import annotations

import re

_CRITERIA = {
    1: "twisted cubic: censuses, twisted classification, index +1/0, refusal with 2-periodic witness",
    2: "coupled expansion: spectral gap + D2 + orientation, certified via d2-gap-direct, quadrants hold",
    3: "folded quartic: manifolds on the axes, FOUR_INVARIANT certificate on the small window",
    4: "arctan pair: kappa-direct and fix-f2-trivial routes, index -1 cross-check",
    5: "index properties: sign-det rule, additivity, refinement stability (200 randomized trials)",
    6: "manifold invariance: random polyline points map back onto the grown curve",
    7: "forced oscillator pipeline: orbit closure, multipliers, determinant, certificate",
    8: "time-T map of the odd cubic field commutes with every element of D2",
    9: "omega-verdicts under a map and its square agree (200 random points per fixture)",
    10: "repeat CLI runs of every shipped config give byte-identical .cert and .csv files",
}

_results: dict[int, list[str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    hit = re.search(r"test_criterion_(\d+)", report.nodeid)
    if hit is None:
        return
    if hasattr(report, "wasxfail"):
        word = "XPASS" if report.passed else "XFAIL"
    elif report.passed:
        word = "PASS"
    elif report.failed:
        word = "XPASS" if "XPASS" in str(report.longrepr) else "FAIL"
    else:
        word = "SKIP"
    _results.setdefault(int(hit.group(1)), []).append(word)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_results):
        words = _results[n]
        if any(w in ("FAIL", "XPASS") for w in words):
            verdict = "FAIL"
        elif "XFAIL" in words:
            verdict = "PARTIAL (strict xfail on record)"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"[criterion {n:2d}] {verdict} — {_CRITERIA.get(n, '')}")
