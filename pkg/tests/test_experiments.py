import numpy as np
import pytest
from src.models.experiment_models import SweepRow, ConvergenceStudy
from src.schemes.picard import PicardSolveError
from src.experiments import runner
from src.experiments.runner import (
    ConvergenceStudyError,
    run_single,
    alpha_sweep,
    fit_slope,
    convergence_study,
    keps_study,
)
from src.experiments.output import CSV_HEADER, emit_csv, read_sweep_csv, emit_plot_data
from src.experiments.presets import PRESETS, get_preset


def test_fit_slope_is_exact_on_power_law():
    n = [10, 20, 40, 80]
    err = [3.0 * (1.0 / k) ** 1.5 for k in n]
    assert fit_slope(n, err) == pytest.approx(1.5, abs=1e-12)


def test_emit_csv_empty(tmp_path):
    path = emit_csv([], tmp_path / "empty.csv")
    assert path.read_text(encoding="utf-8") == ",".join(CSV_HEADER) + "\n"


def test_emit_csv_rows(tmp_path):
    rows = [
        SweepRow(alpha=0.001, converged=False),
        SweepRow(alpha=10.0, nbr=11, log10_err=-1.5, converged=True),
        SweepRow.failed(100.0, "奇异矩阵"),
    ]
    path = emit_csv(rows, tmp_path / "out" / "sweep.csv")
    raw = path.read_bytes()
    assert b"\r\n" not in raw
    lines = raw.decode("utf-8").splitlines()
    assert len(lines) == 4
    assert lines[1] == "0.001,>MAXITER,div,div,"
    assert lines[2] == "10,11,-1.5,ok,"
    assert lines[3] == "100,,,failed,奇异矩阵"
    assert read_sweep_csv(path) == rows


def test_read_rejects_foreign_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_sweep_csv(path)


def test_emit_plot_data(tmp_path):
    study = ConvergenceStudy(
        scheme="gradp", case="Ex1FA", n_values=[10, 100, 1000], err_values=[1e-1, 1e-2, 1e-3], fitted_slope=1.0
    )
    lines = emit_plot_data(study, tmp_path / "conv.dat").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# slope 1"
    assert lines[1].startswith("#")
    data = np.array([[float(v) for v in line.split()] for line in lines[2:]])
    np.testing.assert_allclose(data, [[-1.0, -1.0], [-2.0, -2.0], [-3.0, -3.0]])


def test_run_single_linear_problem():
    report = run_single("gradp", "Ex1FA", 4, alpha=0.0, beta=0.0, tol=1e-6)
    assert report.converged
    assert report.iterations <= 2
    assert 0.0 < report.final_err < 1.0


def test_run_single_rejects_bad_arguments():
    with pytest.raises(ValueError):
        run_single("gradp", "Ex2SA", 4, alpha=1.0)
    with pytest.raises(ValueError):
        run_single("mixed", "Ex2SA", 4, alpha=1.0, init="random")
    with pytest.raises(ValueError):
        run_single("upwind", "Ex2SA", 4, alpha=1.0)


def test_single_alpha_sweep_matches_run_single():
    rows = alpha_sweep("mixed", "Ex2SA", 4, alphas=[10.0], init="darcy", tol=1e-6, workers=1)
    report = run_single("mixed", "Ex2SA", 4, alpha=10.0, init="darcy", tol=1e-6)
    assert rows == [SweepRow.from_report(report)]


def test_sweep_preserves_alpha_order():
    alphas = [100.0, 1.0, 10.0, 1000.0]
    rows = alpha_sweep("gradp", "Ex1FA", 4, alphas=alphas, init="darcy", tol=1e-6, max_iter=500, workers=4)
    assert [row.alpha for row in rows] == alphas
    assert all(row.status in ("ok", "div") for row in rows)


def test_sweep_records_failure_and_continues(monkeypatch):
    original = runner.run_single

    def flaky(scheme, case, n, alpha, **kwargs):
        if alpha == 1.0:
            raise PicardSolveError("模拟的求解失败", 4)
        return original(scheme, case, n, alpha, **kwargs)

    monkeypatch.setattr(runner, "run_single", flaky)
    rows = alpha_sweep("gradp", "Ex1FA", 4, alphas=[10.0, 1.0, 100.0], init="darcy", tol=1e-6)
    assert [row.status for row in rows][1] == "failed"
    assert "模拟的求解失败" in rows[1].error
    assert rows[0].error is None and rows[2].error is None


def test_sweep_argument_errors():
    with pytest.raises(ValueError):
        alpha_sweep("gradp", "Ex1FA", 4, alphas=[])
    with pytest.raises(ValueError):
        alpha_sweep("mixed", "Ex1FA", 4, alphas=[1.0])


def test_convergence_study_argument_errors():
    with pytest.raises(ValueError):
        convergence_study("gradp", "Ex1FA", 10.0, n_values=[4, 8])
    with pytest.raises(ValueError):
        convergence_study("gradp", "Ex1FA", 10.0, n_values=[8, 4, 16])
    with pytest.raises(ValueError):
        convergence_study("mixed", "KepsCase", 10.0, n_values=[4, 8, 16])


def test_convergence_study_reports_unconverged_meshes():
    with pytest.raises(ConvergenceStudyError) as info:
        convergence_study("gradp", "Ex1FA", 10.0, init="zero", n_values=[2, 3, 4], tol=1e-12, max_iter=1)
    assert info.value.failed_n == [2, 3, 4]


def test_convergence_study_first_order():
    study = convergence_study("gradp", "Ex1FA", 10.0, init="darcy", n_values=[8, 16, 32], tol=1e-8)
    assert study.err_values[0] > study.err_values[1] > study.err_values[2]
    assert 0.7 < study.fitted_slope < 1.4


def test_keps_with_unit_permeability():
    rows = keps_study(1.0, alphas=[10.0], n=8, tol=1e-6)
    assert rows[0].converged
    assert rows[0].log10_err is None


def test_presets():
    assert set(PRESETS) == {"t1", "t2", "t3", "fig", "keps"}
    assert get_preset("t1").beta == 20.0 and get_preset("t1").gamma == 20.0
    assert get_preset("t2").init == "darcy"
    assert get_preset("fig").n_values[0] == 60
    with pytest.raises(ValueError):
        get_preset("t9")
