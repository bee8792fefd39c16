"""
带松弛的 Picard 不动点迭代的公共循环。

两种格式共享同一套停止准则：每次求解后计算相对增量 Err_L，
Err_L <= tol 即收敛；达到 max_iter 仍未收敛记为 div。
"""

import math
import sys
import time
from typing import Callable, List, Optional, Tuple, TypeVar
from src.config import config
from src.linalg.sparse import SingularMatrixError, DimensionMismatchError
from src.models.experiment_models import IterationReport
from src.utils.log import get_logger

logger = get_logger(__name__)

# 速度增量的绝对噪声下限
ROUNDOFF_FLOOR = 64 * sys.float_info.epsilon

S = TypeVar("S")


class PicardSolveError(RuntimeError):
    """某一次 Picard 求解失败，iteration 为失败时的迭代序号（从 1 开始）"""

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


def relative_increment(diff_u2: float, diff_p2: float, new_u2: float, new_p2: float) -> float:
    """√((‖Δu‖² + ‖Δp‖²) / (‖u‖² + ‖p‖²))

    分母为 0（新状态恒为零）时：两状态相同返回 0，否则返回 +∞。
    """
    numerator = diff_u2 + diff_p2
    denominator = new_u2 + new_p2
    if denominator == 0.0:
        return 0.0 if numerator == 0.0 else math.inf
    return math.sqrt(numerator / denominator)


def resolve_tolerances(tol: Optional[float], max_iter: Optional[int]) -> Tuple[float, int]:
    tol = config.solver["tol"] if tol is None else tol
    max_iter = config.solver["max_iter"] if max_iter is None else max_iter
    if not tol > 0.0:
        raise ValueError(f"容差必须大于0，当前为 {tol}")
    if int(max_iter) < 1:
        raise ValueError(f"最大迭代次数必须至少为1，当前为 {max_iter}")
    return float(tol), int(max_iter)


def picard_loop(
    step: Callable[[S], S],
    init: S,
    err_l: Callable[[S, S], float],
    increment: Callable[[S, S], float],
    tol: float,
    max_iter: int,
    scheme: str,
    alpha: float,
) -> Tuple[S, IterationReport]:
    """反复执行 state = step(state)，直到 Err_L <= tol 或达到 max_iter

    Args:
        step: 一次组装加求解，输入上一次状态，返回新状态
        init: 初始状态 (u⁰, p⁰)
        err_l: Err_L(new, old)
        increment: ‖u_new - u_old‖_{L²}，用于单调尾部诊断

    Raises:
        PicardSolveError: 任一次线性求解失败
    """
    log_every = config.get_int("SOLVER.log_every", 100)
    history: List[float] = []
    increments: List[float] = []
    converged = False
    state = init
    started = time.perf_counter()

    for iteration in range(1, max_iter + 1):
        try:
            new_state = step(state)
        except (SingularMatrixError, DimensionMismatchError) as e:
            logger.error(f"[{scheme}] α={alpha:g} 第 {iteration} 次 Picard 求解失败: {str(e)}")
            raise PicardSolveError(f"第 {iteration} 次 Picard 求解失败: {str(e)}", iteration) from e

        value = err_l(new_state, state)
        history.append(value)
        increments.append(increment(new_state, state))
        state = new_state

        if iteration % log_every == 0:
            logger.debug(f"[{scheme}] α={alpha:g} 迭代 {iteration}: Err_L={value:.3e}")

        if value <= tol:
            converged = True
            break
        if not math.isfinite(value):
            logger.warning(f"[{scheme}] α={alpha:g} 第 {iteration} 次迭代出现非有限值，提前终止")
            break

    wall_time = time.perf_counter() - started
    report = IterationReport(
        scheme=scheme,
        alpha=alpha,
        iterations=len(history),
        converged=converged,
        tol=tol,
        err_l_history=history,
        velocity_increments=increments,
        wall_time=wall_time,
    )
    outcome = f"收敛, Nbr={report.iterations}" if converged else f"未收敛 (div), 迭代 {report.iterations} 次"
    logger.info(
        f"[{scheme}] α={alpha:g} {outcome}, 最后 Err_L={report.last_err_l:.3e}, 耗时 {wall_time:.2f}s"
    )
    return state, report


def monotone_tail(report: IterationReport, window: int = 10) -> bool:
    """最后 window 次速度增量 ‖u^{i+1} - u^i‖ 是否单调不增

    增量落到舍入误差量级后会来回抖动，低于 ROUNDOFF_FLOOR 的波动不计。
    """
    tail = report.velocity_increments[-window:]
    slack = 1e-12 * max(tail, default=0.0) + ROUNDOFF_FLOOR
    return all(b <= a + slack for a, b in zip(tail, tail[1:]))
