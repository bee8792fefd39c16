import math
from typing import List, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, model_validator


class IterationReport(BaseModel):
    scheme: str = Field(..., description="离散格式: gradp 或 mixed")
    alpha: float = Field(..., description="松弛参数 α")
    iterations: int = Field(..., ge=0, description="Picard 求解次数 Nbr")
    converged: bool = Field(..., description="是否在最大迭代次数内满足停止准则")
    tol: float = Field(..., gt=0, description="停止准则容差")
    err_l_history: List[float] = Field(default_factory=list, description="每次求解后的 Err_L")
    velocity_increments: List[float] = Field(
        default_factory=list, description="每次求解后的 ‖u^{i+1}-u^i‖_{L²}"
    )
    final_err: Optional[float] = Field(None, description="相对解析解的 Err（有解析解时）")
    wall_time: float = Field(0.0, ge=0, description="耗时（秒），仅供参考")

    @model_validator(mode="after")
    def _check_history(self) -> "IterationReport":
        if len(self.err_l_history) != self.iterations:
            raise ValueError(
                f"Err_L 历史长度 {len(self.err_l_history)} 与迭代次数 {self.iterations} 不一致"
            )
        if self.converged and not (self.err_l_history and self.err_l_history[-1] <= self.tol):
            raise ValueError("标记为收敛但最后一次 Err_L 未达到容差")
        return self

    @property
    def last_err_l(self) -> Optional[float]:
        return self.err_l_history[-1] if self.err_l_history else None

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "scheme": "gradp",
                "alpha": 100.0,
                "iterations": 3,
                "converged": True,
                "tol": 1e-5,
                "err_l_history": [1.0, 2.3e-3, 4.1e-6],
                "velocity_increments": [5.2, 1.1e-2, 2.0e-5],
                "final_err": 0.0243,
                "wall_time": 1.7,
            }
        }
    )


class SweepRow(BaseModel):
    """α 扫描表的一行；未收敛时 Err 列写 div，Nbr 列写 >MAXITER"""

    alpha: float = Field(..., description="松弛参数 α")
    nbr: Optional[int] = Field(None, description="收敛时的迭代次数")
    log10_err: Optional[float] = Field(None, description="log10(Err)，无解析解时为空")
    converged: bool = Field(..., description="是否收敛")
    error: Optional[str] = Field(None, description="求解失败时的错误信息")

    @property
    def status(self) -> str:
        if self.error:
            return "failed"
        return "ok" if self.converged else "div"

    @classmethod
    def from_report(cls, report: IterationReport) -> "SweepRow":
        log10_err = None
        if report.converged and report.final_err is not None and report.final_err > 0:
            log10_err = math.log10(report.final_err)
        return cls(
            alpha=report.alpha,
            nbr=report.iterations if report.converged else None,
            log10_err=log10_err,
            converged=report.converged,
        )

    @classmethod
    def failed(cls, alpha: float, message: str) -> "SweepRow":
        return cls(alpha=alpha, converged=False, error=message)


class ConvergenceStudy(BaseModel):
    scheme: str = Field(..., description="离散格式")
    case: str = Field(..., description="算例名称")
    n_values: List[int] = Field(..., description="网格剖分数 N，严格递增")
    err_values: List[float] = Field(..., description="每个 N 上收敛后的 Err")
    fitted_slope: float = Field(..., description="log10(1/N) 与 log10(Err) 的最小二乘斜率")

    @model_validator(mode="after")
    def _check_lengths(self) -> "ConvergenceStudy":
        if len(self.n_values) != len(self.err_values):
            raise ValueError("n_values 与 err_values 长度不一致")
        if len(self.n_values) < 3:
            raise ValueError("收敛性研究至少需要 3 个网格")
        return self


class ConsistencyReport(BaseModel):
    """解析解与数据 (f, b) 的一致性检查结果"""

    case: str = Field(..., description="算例名称")
    n_points: int = Field(..., description="采样点数")
    tol: float = Field(..., description="允许的残差")
    max_momentum_residual: float = Field(..., description="max |f - u - β|u|u - ∇p|")
    max_divergence_residual: float = Field(..., description="max |div u - b|")
    failing_points: List[Tuple[float, float]] = Field(
        default_factory=list, description="残差超出容差的采样点"
    )

    @property
    def passed(self) -> bool:
        return not self.failing_points
