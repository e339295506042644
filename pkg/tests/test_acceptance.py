"""Acceptance criteria A1-A11, one test each.

Each test prints a single ``A<n> PASS|FAIL`` line (also repeated in the
terminal summary) and asserts the criterion at its stated tolerance.
"""

import time

import pytest

from fraccount import cli, verify

SEED = 42


def _run(name, fn, **kw):
    t0 = time.perf_counter()
    rows = fn(**kw)
    return rows, time.perf_counter() - t0


def _record(log, capsys, crit, ok, elapsed, limit, rows, note=""):
    worst = ", ".join(f"{r.check}={r.value:.3g}/{r.tolerance:.3g}{'' if r.passed else ' FAIL'}"
                      for r in rows if r.criterion == crit)
    extra = [r.check for r in rows if r.criterion != crit and not r.passed]
    line = (f"{crit} {'PASS' if ok else 'FAIL'}  ({elapsed:.1f}s, limit {limit:g}s)  {worst}"
            + (f"  [supplement failures: {extra}]" if extra else "") + (f"  {note}" if note else ""))
    log.append(line)
    with capsys.disabled():
        print("\n" + line)


def _criterion(crit, rows, elapsed, limit):
    own = [r for r in rows if r.criterion == crit]
    assert own, f"no checks for {crit}"
    return all(r.passed for r in own) and elapsed < limit


def test_a1_special_functions(acceptance_log, capsys):
    rows, dt = _run("A1", verify.check_special_functions, seed=SEED)
    ok = _criterion("A1", rows, dt, 1.0)
    _record(acceptance_log, capsys, "A1", ok, dt, 1.0, rows)
    assert ok


def test_a2_subordinator_laplace_transforms(acceptance_log, capsys):
    rows, dt = _run("A2", verify.check_subordinator_lt, seed=SEED)
    ok = _criterion("A2", rows, dt, 60.0)
    _record(acceptance_log, capsys, "A2", ok, dt, 60.0, rows)
    assert ok


def test_a3_composed_exponent(acceptance_log, capsys):
    rows, dt = _run("A3", verify.check_composed_exponent, seed=SEED)
    ok = _criterion("A3", rows, dt, 60.0)
    _record(acceptance_log, capsys, "A3", ok, dt, 60.0, rows)
    assert ok


def test_a4_three_way_pmf(acceptance_log, capsys):
    rows, dt = _run("A4", verify.check_three_way, seed=SEED)
    ok = _criterion("A4", rows, dt, 120.0)
    _record(acceptance_log, capsys, "A4", ok, dt, 120.0, rows)
    assert ok


def test_a5_moment_formulas(acceptance_log, capsys):
    rows, dt = _run("A5", verify.check_moments, seed=SEED)
    ok = _criterion("A5", rows, dt, 60.0)
    _record(acceptance_log, capsys, "A5", ok, dt, 60.0, rows,
            note="printed variance 0.875 vs shared-clock variance 1.25")
    assert ok


def test_a6_levy_small_time(acceptance_log, capsys):
    rows, dt = _run("A6", verify.check_levy_limit, seed=SEED)
    ok = _criterion("A6", rows, dt, 30.0)
    _record(acceptance_log, capsys, "A6", ok, dt, 30.0, rows)
    assert ok


def test_a7_ruin_cross_validation(acceptance_log, capsys):
    rows, dt = _run("A7", verify.check_ruin, seed=SEED)
    ok = _criterion("A7", rows, dt, 300.0)
    gap = next(r for r in rows if r.check == "risk.mc_vs_ode_p0")
    # the alternative branch of (ii) requires both numbers in the report
    assert gap.detail["within_ci"] or (gap.detail["reported_gap"] and
                                       "mc" in gap.detail and "ode_single_claim" in gap.detail)
    note = f"mc={gap.detail['mc']:.4f} ode={gap.detail['ode_single_claim']:.4f}"
    _record(acceptance_log, capsys, "A7", ok, dt, 300.0, rows, note=note)
    assert ok


def test_a8_stochastic_equivalence(acceptance_log, capsys):
    rows, dt = _run("A8", verify.check_equivalence, seed=SEED)
    ok = _criterion("A8", rows, dt, 120.0)
    _record(acceptance_log, capsys, "A8", ok, dt, 120.0, rows)
    assert ok


def test_a9_long_range_dependence(acceptance_log, capsys):
    rows, dt = _run("A9", verify.check_lrd, seed=SEED)
    ok = _criterion("A9", rows, dt, 120.0)
    _record(acceptance_log, capsys, "A9", ok, dt, 120.0, rows)
    assert ok


def test_a10_operator_residuals(acceptance_log, capsys):
    rows, dt = _run("A10", verify.check_operator_residuals, seed=SEED)
    ok = _criterion("A10", rows, dt, 30.0)
    _record(acceptance_log, capsys, "A10", ok, dt, 30.0, rows)
    assert ok


def test_a11_determinism(acceptance_log, capsys, tmp_path):
    t0 = time.perf_counter()
    codes, blobs = [], []
    for run in ("first", "second"):
        out = tmp_path / run
        codes.append(cli.main(["verify", "all", "--seed", str(SEED), "--out", str(out)]))
        blobs.append((out / "verify-all.json").read_bytes())
    capsys.readouterr()
    dt = time.perf_counter() - t0
    ok = blobs[0] == blobs[1] and codes[0] == codes[1]
    line = (f"A11 {'PASS' if ok else 'FAIL'}  ({dt:.1f}s, two suite runs)  "
            f"identical={blobs[0] == blobs[1]} bytes={len(blobs[0])} exit_codes={codes}")
    acceptance_log.append(line)
    with capsys.disabled():
        print("\n" + line)
    assert ok
