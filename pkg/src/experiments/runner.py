import concurrent.futures
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence
import numpy as np
from src.config import config
from src.mesh.triangle_mesh import TriangleMesh, build_unit_square_mesh
from src.cases.manufactured import ManufacturedCase, make_case
from src.linalg.sparse import SingularMatrixError
from src.models.experiment_models import IterationReport, SweepRow, ConvergenceStudy
from src.schemes.picard import PicardSolveError
from src.schemes.gradp import (
    GradPSystemSpec,
    GradPState,
    darcy_initial_guess_gradp,
    picard_iterate_gradp,
    err_vs_exact_gradp,
)
from src.schemes.mixed import (
    MixedSystemSpec,
    MixedState,
    darcy_initial_guess_mixed,
    picard_iterate_mixed,
    err_vs_exact_mixed,
)
from src.utils.log import get_logger

logger = get_logger(__name__)

INITS = ("zero", "darcy")


class ConvergenceStudyError(RuntimeError):
    """收敛性研究中有网格未收敛"""

    def __init__(self, message: str, failed_n: List[int]):
        super().__init__(message)
        self.failed_n = failed_n


class SchemeOps(NamedTuple):
    spec_from_case: Callable
    zeros: Callable
    darcy: Callable
    iterate: Callable
    err_vs_exact: Callable


SCHEMES: Dict[str, SchemeOps] = {
    "gradp": SchemeOps(
        GradPSystemSpec.from_case,
        GradPState.zeros,
        darcy_initial_guess_gradp,
        picard_iterate_gradp,
        err_vs_exact_gradp,
    ),
    "mixed": SchemeOps(
        MixedSystemSpec.from_case,
        MixedState.zeros,
        darcy_initial_guess_mixed,
        picard_iterate_mixed,
        err_vs_exact_mixed,
    ),
}


def _check_choice(name: str, value: str, choices: Sequence[str]) -> None:
    if value not in choices:
        raise ValueError(f"无效的{name}: {value}，可选 {', '.join(choices)}")


def _resolve_case(case, gamma: float, beta: float, eps_k: float) -> ManufacturedCase:
    if isinstance(case, ManufacturedCase):
        return case
    return make_case(case, gamma=gamma, beta=beta, eps_k=eps_k)


def run_single(
    scheme: str,
    case,
    n: int,
    alpha: float,
    beta: float = 10.0,
    gamma: float = 1.0,
    init: str = "zero",
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    penalty: Optional[float] = None,
    eps_k: float = 1e6,
    mesh: Optional[TriangleMesh] = None,
) -> IterationReport:
    """单次数值实验：网格 + 算例 + 格式 + Picard 迭代

    Args:
        case: 算例名称或已构造的 ManufacturedCase
        mesh: 可选的共享网格，必须与 n 一致

    Raises:
        ValueError: 参数无效或格式与算例不匹配
        PicardSolveError: 线性求解失败，消息中带有运行参数
    """
    _check_choice("格式", scheme, tuple(SCHEMES))
    _check_choice("初值", init, INITS)
    ops = SCHEMES[scheme]
    case = _resolve_case(case, gamma, beta, eps_k)
    mesh = mesh or build_unit_square_mesh(n)
    if mesh.n_divisions != n:
        raise ValueError(f"共享网格的 N={mesh.n_divisions} 与 n={n} 不一致")

    spec = ops.spec_from_case(mesh, case, alpha, penalty)
    context = f"{scheme}/{case.name} N={n} α={alpha:g} β={case.beta:g} γ={case.gamma:g} init={init}"

    try:
        state = ops.zeros(mesh) if init == "zero" else ops.darcy(spec)
    except SingularMatrixError as e:
        logger.error(f"{context}: Darcy 初值求解失败: {str(e)}")
        raise PicardSolveError(f"{context}: Darcy 初值求解失败: {str(e)}", 0) from e

    try:
        state, report = ops.iterate(spec, state, tol, max_iter)
    except PicardSolveError as e:
        raise PicardSolveError(f"{context}: {str(e)}", e.iteration) from e

    if case.has_exact and report.converged:
        report.final_err = ops.err_vs_exact(state, case, mesh)
        logger.info(f"{context}: Err={report.final_err:.6e} (log10 {np.log10(report.final_err):.4f})")
    return report


def _map_ordered(fn: Callable, items: Sequence, workers: Optional[int]) -> List:
    """并发执行，结果按 items 的顺序返回；异常原样保存在结果里"""
    workers = workers or config.get_int("EXPERIMENT.workers", 4)
    results: List = [None] * len(items)
    with concurrent.futures.ThreadPoolExecutor(max_workers=min(workers, max(len(items), 1))) as executor:
        futures = {executor.submit(fn, item): i for i, item in enumerate(items)}
        for future in concurrent.futures.as_completed(futures):
            i = futures[future]
            try:
                results[i] = future.result()
            except Exception as e:
                results[i] = e
    return results


def alpha_sweep(
    scheme: str,
    case,
    n: int,
    beta: float = 10.0,
    gamma: float = 1.0,
    init: str = "zero",
    alphas: Optional[Sequence[float]] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    penalty: Optional[float] = None,
    eps_k: float = 1e6,
    workers: Optional[int] = None,
) -> List[SweepRow]:
    """对每个 α 做一次 run_single，网格与算例只构造一次

    单行失败只记录在该行，扫描继续。
    """
    alphas = list(config.get_float_list("EXPERIMENT.alphas") if alphas is None else alphas)
    if not alphas:
        raise ValueError("alpha 列表不能为空")
    _check_choice("格式", scheme, tuple(SCHEMES))
    _check_choice("初值", init, INITS)
    case = _resolve_case(case, gamma, beta, eps_k)
    mesh = build_unit_square_mesh(n)
    # 参数错误在启动并发前暴露
    SCHEMES[scheme].spec_from_case(mesh, case, alphas[0], penalty)

    def run(alpha: float) -> IterationReport:
        return run_single(
            scheme, case, n, alpha, init=init, tol=tol, max_iter=max_iter, penalty=penalty, mesh=mesh
        )

    rows: List[SweepRow] = []
    for alpha, result in zip(alphas, _map_ordered(run, alphas, workers)):
        if isinstance(result, IterationReport):
            rows.append(SweepRow.from_report(result))
        elif isinstance(result, RuntimeError):
            logger.error(f"α={alpha:g} 求解失败，扫描继续: {str(result)}")
            rows.append(SweepRow.failed(alpha, str(result)))
        else:
            raise result
    return rows


def fit_slope(n_values: Sequence[int], err_values: Sequence[float]) -> float:
    """log10(Err) 对 log10(h) 的最小二乘斜率，h = 1/N"""
    log_h = np.log10(1.0 / np.asarray(n_values, dtype=float))
    log_err = np.log10(np.asarray(err_values, dtype=float))
    slope, _ = np.polyfit(log_h, log_err, 1)
    return float(slope)


def convergence_study(
    scheme: str,
    case,
    alpha: float,
    beta: float = 10.0,
    gamma: float = 1.0,
    init: str = "darcy",
    n_values: Optional[Sequence[int]] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    penalty: Optional[float] = None,
    workers: Optional[int] = None,
) -> ConvergenceStudy:
    """在一列网格上求收敛后的 Err 并拟合收敛阶

    Raises:
        ValueError: n_values 不是长度至少为 3 的严格递增序列
        ConvergenceStudyError: 有网格未收敛或求解失败
    """
    n_values = list(config.get_int_list("EXPERIMENT.n_values") if n_values is None else n_values)
    if len(n_values) < 3 or any(b <= a for a, b in zip(n_values, n_values[1:])) or n_values[0] < 1:
        raise ValueError(f"网格序列必须是长度至少为 3 的严格递增正整数: {n_values}")
    case = _resolve_case(case, gamma, beta, 1e6)
    if not case.has_exact:
        raise ValueError(f"算例 {case.name} 没有解析解，无法做收敛性研究")

    def run(n: int) -> IterationReport:
        return run_single(scheme, case, n, alpha, init=init, tol=tol, max_iter=max_iter, penalty=penalty)

    results = _map_ordered(run, n_values, workers)
    failed = []
    for n, result in zip(n_values, results):
        if isinstance(result, ValueError):
            raise result
        if not isinstance(result, IterationReport) or not result.converged:
            reason = str(result) if isinstance(result, Exception) else f"{result.iterations} 次迭代未收敛"
            logger.error(f"收敛性研究 N={n} 失败: {reason}")
            failed.append(n)
    if failed:
        raise ConvergenceStudyError(f"{scheme}/{case.name} 以下网格未收敛: {failed}", failed)

    errors = [r.final_err for r in results]
    study = ConvergenceStudy(
        scheme=scheme,
        case=case.name,
        n_values=n_values,
        err_values=errors,
        fitted_slope=fit_slope(n_values, errors),
    )
    logger.info(f"收敛性研究 {scheme}/{case.name}: 斜率 {study.fitted_slope:.4f}")
    return study


def keps_study(
    eps_k: float,
    alphas: Optional[Sequence[float]] = None,
    init: str = "zero",
    n: int = 60,
    beta: float = 10.0,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    penalty: Optional[float] = None,
    workers: Optional[int] = None,
) -> List[SweepRow]:
    """间断渗透率算例上格式二的 α 扫描，只有 Nbr 没有 Err"""
    return alpha_sweep(
        "mixed",
        "KepsCase",
        n,
        beta=beta,
        init=init,
        alphas=alphas,
        tol=tol,
        max_iter=max_iter,
        penalty=penalty,
        eps_k=eps_k,
        workers=workers,
    )
