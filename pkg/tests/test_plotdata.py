import numpy as np
import pandas as pd
import pytest

from cgorecon.acceptance import CheckResult, VerifyReport
from cgorecon.cgo import ExceptionalScan
from cgorecon.faddeev import NormSample
from cgorecon.plotdata import emit_plotdata, to_frame
from cgorecon.recon import PairingSample, RecoveryResult, ShellPoint, ShellRecovery
from cgorecon.scattering import ScatteringMatrixData


def test_smatrix_rows(tmp_path):
    matrix = np.array([[1.0, 2j], [-1.0, 0.5 + 0.5j]])
    path = emit_plotdata(ScatteringMatrixData(1.0, 0, matrix, 0.0), tmp_path)
    assert path.name == "smatrix.csv"
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["row", "col", "re", "im"]
    assert frame[["row", "col"]].values.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert frame["im"].tolist() == [0.0, 2.0, 0.0, 0.5]


def test_empty_scan_writes_header_only(tmp_path):
    scan = ExceptionalScan([], np.array([]), 1e-3, 0.25)
    path = emit_plotdata(scan, tmp_path)
    assert path.read_text().strip() == "re_z,im_z,rho_perp_1,rho_perp_2,indicator,flagged"


def test_norm_sweep_and_shell_names(tmp_path):
    samples = [NormSample(2.0, 0.3, 2j, 0.0, 0.0)]
    assert emit_plotdata(samples, tmp_path).name == "norm_sweep.csv"
    shell = ShellRecovery([ShellPoint((3.0, 0.0, 0.0), 0.0175 + 0j, 8.0, 1e-6)], (2.0, 3.6))
    frame = pd.read_csv(emit_plotdata(shell, tmp_path))
    assert list(frame.columns) == ["zeta1", "zeta2", "zeta3", "abs_zeta", "t", "re", "im", "err"]
    assert frame["re"].iloc[0] == pytest.approx(0.0175)


def test_full_precision(tmp_path):
    value = 0.1 + 1e-16
    result = RecoveryResult((3.0, 0.0, 0.0), [PairingSample((3.0, 0.0, 0.0), 4.0, complex(1 / 3, value), 0.0)])
    frame = pd.read_csv(emit_plotdata(result, tmp_path, "convergence_0"), float_precision="round_trip")
    assert frame["re"].iloc[0] == 1 / 3
    assert frame["im"].iloc[0] == value


def test_report_json_round_trip(tmp_path):
    report = VerifyReport(
        scenario="small",
        seed=7,
        half_width=4.0,
        points_per_axis=16,
        checks=[CheckResult(name="multiplier_identity", passed=True, value=1e-14, threshold=1e-8)],
        elapsed_seconds=0.5,
    )
    path = emit_plotdata(report, tmp_path, "verify")
    assert path.suffix == ".json"
    assert VerifyReport.model_validate_json(path.read_text()) == report


def test_unknown_result_kind():
    with pytest.raises(TypeError):
        to_frame({"not": "a result"})
