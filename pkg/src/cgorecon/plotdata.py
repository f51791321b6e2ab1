"""
Flat CSV / JSON projections of every result kind, with a fixed header per
kind and rows in the order the result stores them.

    norm sweep         re_z,im_z,rho_perp_1,rho_perp_2,norm_estimate
    exceptional scan   re_z,im_z,rho_perp_1,rho_perp_2,indicator,flagged
    shell recovery     zeta1,zeta2,zeta3,abs_zeta,t,re,im,err
    convergence table  t,re,im,abs_diff_to_final,quadrature_error
    completion         zeta_abs,re,im  (zeta1,zeta2,zeta3 first when angular)
    S-matrix           row,col,re,im
    reports            pydantic JSON
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel

from .cgo import ExceptionalScan
from .faddeev import NormSample, norm_sweep_frame
from .recon import Completion, RecoveryResult, ShellRecovery
from .scattering import ScatteringMatrixData

FLOAT_FORMAT = "%.17g"
DEFAULT_NAMES = {
    "norm_sweep": "norm_sweep",
    ExceptionalScan: "exceptional_scan",
    ShellRecovery: "shell",
    RecoveryResult: "convergence",
    Completion: "completion",
    ScatteringMatrixData: "smatrix",
}


def smatrix_frame(data: ScatteringMatrixData) -> pd.DataFrame:
    n = data.matrix.shape[0]
    rows, cols = np.divmod(np.arange(n * n), n)
    values = data.matrix.ravel()
    return pd.DataFrame({"row": rows, "col": cols, "re": values.real, "im": values.imag}, columns=["row", "col", "re", "im"])


def to_frame(result) -> pd.DataFrame:
    """The CSV projection of a result; raises TypeError for kinds without one."""
    if isinstance(result, pd.DataFrame):
        return result
    if isinstance(result, list) and all(isinstance(s, NormSample) for s in result):
        return norm_sweep_frame(result)
    if isinstance(result, ExceptionalScan | ShellRecovery | Completion):
        return result.frame()
    if isinstance(result, RecoveryResult):
        return result.table()
    if isinstance(result, ScatteringMatrixData):
        return smatrix_frame(result)
    raise TypeError(f"No CSV projection for {type(result).__name__}.")


def _default_name(result) -> str:
    if isinstance(result, list):
        return DEFAULT_NAMES["norm_sweep"]
    return DEFAULT_NAMES.get(type(result), type(result).__name__.lower())


def emit_plotdata(result, out_dir: Path, name: str | None = None) -> Path:
    """Writes `<name>.csv` (or `<name>.json` for pydantic reports) under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = name or _default_name(result)
    if isinstance(result, BaseModel):
        path = out_dir / f"{name}.json"
        path.write_text(result.model_dump_json(indent=2))
    else:
        path = out_dir / f"{name}.csv"
        to_frame(result).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logging.info(f"Wrote plot data {path}")
    return path
