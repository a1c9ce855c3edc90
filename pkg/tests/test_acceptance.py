"""Acceptance criteria 1-11, each at its stated tolerance.

Every criterion prints one PASS/FAIL line (collected again in the terminal
summary).  Claim reports are cached so criterion 11 can rerun each claim
once and compare serialized bytes.
"""

import time

import pytest

from genexp.claims import CLAIMS, run_claim
from genexp.reports import dumps

_CACHE = {}


def claim(name):
    if name not in _CACHE:
        t0 = time.perf_counter()
        rep = run_claim(name)
        _CACHE[name] = (rep, time.perf_counter() - t0)
    return _CACHE[name]


def failed(rep):
    return [c["check"] for c in rep["checks"] if not c["ok"]]


def record(log, criterion, ok, detail=""):
    line = f"criterion {criterion:>2} {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    print(line)
    log.append(line)


@pytest.mark.parametrize("name", [c.name for c in CLAIMS.values()], ids=lambda n: f"{CLAIMS[n].criterion}-{n}")
def test_criterion(name, acceptance_log):
    crit = CLAIMS[name].criterion
    rep, secs = claim(name)
    ok = rep["ok"]
    detail = f"{name} ({secs:.1f}s)"
    if crit == 1:
        ok = ok and secs < 30
        sep = rep["separation_run"]
        detail += f"; at the separation horizon {sep['horizon']}: {'pass' if sep['ok'] else 'fail'}"
    if not rep["ok"]:
        detail += "; failing checks: " + ", ".join(failed(rep))
    record(acceptance_log, crit, ok, detail)
    assert rep["ok"], failed(rep)
    if crit == 1:
        assert secs < 30


def test_criterion_11_determinism(acceptance_log):
    differing = []
    for name in CLAIMS:
        first, _ = claim(name)
        if dumps(first) != dumps(run_claim(name)):
            differing.append(name)
    record(acceptance_log, 11, not differing,
           "all claim reports byte-identical across two runs" if not differing else "differ: " + ", ".join(differing))
    assert not differing
