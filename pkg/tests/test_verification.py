import numpy as np
import pytest

from fputwaves.services import verification
from fputwaves.utils.errors import ConvergenceError, InvalidInputError


def test_operator_algebra_check_passes():
    report = verification.check_operator_algebra("quick")
    assert report.status == "pass"
    assert report.check_id == 1


def test_dispersion_check_passes():
    assert verification.check_dispersion("quick").status == "pass"


def test_solitary_check_accepts_the_solved_wave(wave):
    report = verification.check_solitary_core(wave)
    assert report.status == "pass"
    assert "self_convergence" not in report.measured


def test_solitary_check_rejects_a_corrupted_profile(wave):
    profile = wave.profile
    bumped = profile.with_values(profile.values + 1e-3 * np.exp(-(profile.grid.x / 2) ** 2))
    report = verification.check_solitary_core(wave.model_copy(update={"profile": bumped}))
    assert report.status == "fail"
    assert report.measured["residual"] > 1e-6


def test_run_check_reports_solver_errors(monkeypatch):
    def broken(level, c):
        raise ConvergenceError("no luck")

    monkeypatch.setattr(verification, "CHECKS", [("broken", broken)] + verification.CHECKS[1:])
    report = verification.run_check(0)
    assert report.status == "error"
    assert report.detail == "no luck"
    assert report.runtime >= 0


def test_run_check_survives_unexpected_exceptions(monkeypatch):
    def crashing(level, c):
        raise ZeroDivisionError("boom")

    monkeypatch.setattr(verification, "CHECKS", [("crashing", crashing)] + verification.CHECKS[1:])
    assert verification.run_check(0).status == "error"


def test_run_suite_selects_checks_and_validates_ids():
    reports = verification.run_suite("quick", only=[1, 4])
    assert [r.check_id for r in reports] == [1, 4]
    with pytest.raises(InvalidInputError):
        verification.run_suite("quick", only=[len(verification.CHECKS) + 1])


def test_report_frame_layout():
    reports = [verification.check_operator_algebra("quick")]
    frame = verification.report_frame(reports)
    assert list(frame.columns) == ["id", "check", "status", "target", "runtime_s", "measured"]
    assert frame.loc[0, "status"] == "pass"


def test_every_check_has_a_title():
    assert len(verification.CHECKS) == 11
    assert all(title for title, _ in verification.CHECKS)


@pytest.mark.slow
def test_periodic_check_passes():
    assert verification.run_check(4).status == "pass"
