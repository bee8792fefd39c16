"""
结果文件格式。

扫描表 CSV：表头 alpha,nbr,log10_err,status,error；未收敛行 nbr 列写 >MAXITER、
log10_err 列写 div；失败行 status 为 failed 并保存错误信息。
收敛阶数据：首行 "# slope <斜率>"，随后每行 "log10_h log10_err"。
浮点数统一以 17 位有效数字写出，UTF-8 编码，LF 换行。
"""

import csv
from pathlib import Path
from typing import List, Optional, Union
import numpy as np
from src.models.experiment_models import SweepRow, ConvergenceStudy
from src.utils.log import get_logger

logger = get_logger(__name__)

CSV_HEADER = ["alpha", "nbr", "log10_err", "status", "error"]
DIV_ERR = "div"
DIV_NBR = ">MAXITER"


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else format(value, ".17g")


def _row_cells(row: SweepRow) -> List[str]:
    if row.status == "div":
        return [_fmt(row.alpha), DIV_NBR, DIV_ERR, row.status, ""]
    nbr = "" if row.nbr is None else str(row.nbr)
    return [_fmt(row.alpha), nbr, _fmt(row.log10_err), row.status, row.error or ""]


def emit_csv(rows: List[SweepRow], path: Union[str, Path]) -> Path:
    """写出扫描表

    Raises:
        OSError: 文件无法写入
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(_row_cells(row))
    logger.info(f"扫描结果已写入: {path} ({len(rows)} 行)")
    return path


def read_sweep_csv(path: Union[str, Path]) -> List[SweepRow]:
    """读回 emit_csv 写出的扫描表"""
    rows: List[SweepRow] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"无法识别的表头: {reader.fieldnames}")
        for record in reader:
            status = record["status"]
            alpha = float(record["alpha"])
            if status == "div":
                rows.append(SweepRow(alpha=alpha, converged=False))
            elif status == "failed":
                rows.append(SweepRow.failed(alpha, record["error"]))
            else:
                rows.append(SweepRow(
                    alpha=alpha,
                    nbr=int(record["nbr"]) if record["nbr"] else None,
                    log10_err=float(record["log10_err"]) if record["log10_err"] else None,
                    converged=True,
                ))
    return rows


def emit_plot_data(study: ConvergenceStudy, path: Union[str, Path]) -> Path:
    """写出收敛阶绘图数据（log10 h 与 log10 Err 两列）"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    log_h = np.log10(1.0 / np.asarray(study.n_values, dtype=float))
    log_err = np.log10(np.asarray(study.err_values, dtype=float))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# slope {_fmt(study.fitted_slope)}\n")
        fh.write("# log10_h log10_err\n")
        for h, e in zip(log_h, log_err):
            fh.write(f"{_fmt(float(h))} {_fmt(float(e))}\n")
    logger.info(f"收敛阶数据已写入: {path} (斜率 {study.fitted_slope:.4f})")
    return path
