import sys
from pathlib import Path

# 添加项目根目录到 Python 路径
project_root = str(Path(__file__).parent.parent)
sys.path.insert(0, project_root)

import argparse
import math
from typing import List, Optional, Sequence
from rich.console import Console
from rich.table import Table
from src.config import config
from src.utils.log import get_logger, set_level
from src.cases.manufactured import CASE_NAMES
from src.mesh.triangle_mesh import build_unit_square_mesh, dump_mesh
from src.models.experiment_models import IterationReport, SweepRow, ConvergenceStudy
from src.experiments.presets import PRESETS, Preset, get_preset
from src.experiments.runner import (
    SCHEMES,
    INITS,
    run_single,
    alpha_sweep,
    convergence_study,
    keps_study,
)
from src.experiments.output import emit_csv, emit_plot_data

logger = get_logger(__name__)
console = Console()
err_console = Console(stderr=True)

ALPHA_HINT = "理论收敛条件要求 α 相对 h^-d 足够大；实践中建议先取 α >= 10 测试收敛性"


def _float_list(raw: str) -> List[float]:
    try:
        values = [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"必须是逗号分隔的数字: {raw}")
    if not values:
        raise argparse.ArgumentTypeError("列表不能为空")
    return values


def _int_list(raw: str) -> List[int]:
    try:
        values = [int(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"必须是逗号分隔的整数: {raw}")
    if not values:
        raise argparse.ArgumentTypeError("列表不能为空")
    return values


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol", type=float, help=f"Err_L 停止容差，默认 {config.solver['tol']:g}")
    parser.add_argument("--max-iter", type=int, help=f"最大迭代次数，默认 {config.solver['max_iter']}")
    parser.add_argument("--penalty", type=float, help=f"罚参数 ε，默认 {config.solver['penalty']:g}")
    parser.add_argument("--workers", type=int, help="并发运行数，默认取 DF_WORKERS")
    parser.add_argument("--out", help="输出文件路径")
    parser.add_argument("--verbose", action="store_true", help="输出 DEBUG 级别日志")


def _add_problem_flags(parser: argparse.ArgumentParser, with_case: bool = True) -> None:
    if with_case:
        parser.add_argument("--scheme", choices=tuple(SCHEMES), required=True,
                            help="gradp: P0 速度/P1 压力；mixed: RT0 速度/P0 压力")
        parser.add_argument("--case", choices=CASE_NAMES[:-1], required=True, help="人工解算例")
        parser.add_argument("--gamma", type=float, help="速度幅值 γ")
    parser.add_argument("--beta", type=float, help="Forchheimer 数 β")
    parser.add_argument("--init", choices=INITS, help="初值：zero 或 darcy（β=α=0 的 Darcy 解）")
    parser.add_argument("--preset", choices=tuple(PRESETS), help="预设参数组，显式参数优先")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m src",
        description="Darcy-Forchheimer 问题的有限元求解与数值实验",
        epilog=ALPHA_HINT,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="单次求解", epilog=ALPHA_HINT)
    _add_problem_flags(run)
    run.add_argument("--n", type=int, help="网格剖分数 N")
    run.add_argument("--alpha", type=float, required=True, help="松弛参数 α")
    _add_solver_flags(run)

    sweep = sub.add_parser("sweep-alpha", help="α 扫描表", epilog=ALPHA_HINT)
    _add_problem_flags(sweep)
    sweep.add_argument("--n", type=int, help="网格剖分数 N")
    sweep.add_argument("--alphas", type=_float_list, help="逗号分隔的 α 列表")
    _add_solver_flags(sweep)

    conv = sub.add_parser("convergence", help="收敛阶研究", epilog=ALPHA_HINT)
    _add_problem_flags(conv)
    conv.add_argument("--alpha", type=float, help="松弛参数 α")
    conv.add_argument("--n-values", type=_int_list, help="逗号分隔的网格序列")
    _add_solver_flags(conv)

    keps = sub.add_parser("keps", help="间断渗透率算例的 α 扫描（格式二）", epilog=ALPHA_HINT)
    _add_problem_flags(keps, with_case=False)
    keps.add_argument("--eps-k", type=float, required=True, help="子区域内的渗透率 ε_K")
    keps.add_argument("--n", type=int, help="网格剖分数 N")
    keps.add_argument("--alphas", type=_float_list, help="逗号分隔的 α 列表")
    _add_solver_flags(keps)

    mesh = sub.add_parser("mesh", help="导出网格（文本格式）")
    mesh.add_argument("--n", type=int, required=True, help="网格剖分数 N")
    mesh.add_argument("--out", required=True, help="输出文件路径")
    mesh.add_argument("--verbose", action="store_true", help="输出 DEBUG 级别日志")
    return parser


def _pick(value, preset: Optional[Preset], attr: str, default):
    if value is not None:
        return value
    if preset is not None and getattr(preset, attr) is not None:
        return getattr(preset, attr)
    return default


def _apply_solver_overrides(args: argparse.Namespace) -> None:
    """命令行参数通过 update_config 覆盖配置，并重新校验"""
    if getattr(args, "tol", None) is not None:
        config.update_config("SOLVER.tol", args.tol)
    if getattr(args, "max_iter", None) is not None:
        config.update_config("SOLVER.max_iter", args.max_iter)
    if getattr(args, "penalty", None) is not None:
        config.update_config("SOLVER.penalty", args.penalty)
    if getattr(args, "workers", None) is not None:
        config.update_config("EXPERIMENT.workers", args.workers)


def _default_out(name: str) -> Path:
    return Path(config.experiment["output_dir"]) / name


def _sweep_table(title: str, rows: Sequence[SweepRow]) -> Table:
    table = Table(title=title)
    table.add_column("α", justify="right")
    table.add_column("Nbr", justify="right")
    table.add_column("log10 Err", justify="right")
    table.add_column("状态")
    for row in rows:
        if row.status == "div":
            nbr, err = ">MAXITER", "div"
        else:
            nbr = "-" if row.nbr is None else str(row.nbr)
            err = "-" if row.log10_err is None else f"{row.log10_err:.5f}"
        table.add_row(f"{row.alpha:g}", nbr, err, row.status if not row.error else f"failed: {row.error}")
    return table


def _study_table(study: ConvergenceStudy) -> Table:
    table = Table(title=f"{study.scheme}/{study.case} 收敛阶 (斜率 {study.fitted_slope:.4f})")
    table.add_column("N", justify="right")
    table.add_column("h", justify="right")
    table.add_column("Err", justify="right")
    table.add_column("log10 Err", justify="right")
    for n, err in zip(study.n_values, study.err_values):
        table.add_row(str(n), f"{1.0 / n:.5f}", f"{err:.6e}", f"{math.log10(err):.5f}")
    return table


def _report_table(report: IterationReport) -> Table:
    table = Table(title=f"{report.scheme} α={report.alpha:g}")
    table.add_column("项目")
    table.add_column("值", justify="right")
    table.add_row("收敛", "是" if report.converged else "否 (div)")
    table.add_row("Nbr", str(report.iterations))
    if report.last_err_l is not None:
        table.add_row("最后 Err_L", f"{report.last_err_l:.3e}")
    if report.final_err is not None:
        table.add_row("Err", f"{report.final_err:.6e}")
        table.add_row("log10 Err", f"{math.log10(report.final_err):.5f}")
    table.add_row("耗时 (s)", f"{report.wall_time:.2f}")
    return table


def cmd_run(args: argparse.Namespace) -> int:
    preset = get_preset(args.preset) if args.preset else None
    report = run_single(
        args.scheme,
        args.case,
        _pick(args.n, preset, "n", config.experiment["default_n"]),
        args.alpha,
        beta=_pick(args.beta, preset, "beta", 10.0),
        gamma=_pick(args.gamma, preset, "gamma", 1.0),
        init=_pick(args.init, preset, "init", "zero"),
    )
    console.print(_report_table(report))
    if args.out:
        emit_csv([SweepRow.from_report(report)], args.out)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    preset = get_preset(args.preset) if args.preset else None
    n = _pick(args.n, preset, "n", config.experiment["default_n"])
    beta = _pick(args.beta, preset, "beta", 10.0)
    gamma = _pick(args.gamma, preset, "gamma", 1.0)
    init = _pick(args.init, preset, "init", "zero")
    rows = alpha_sweep(args.scheme, args.case, n, beta=beta, gamma=gamma, init=init, alphas=args.alphas)
    title = f"{args.scheme}/{args.case} N={n} β={beta:g} γ={gamma:g} init={init}"
    console.print(_sweep_table(title, rows))
    out = args.out or _default_out(f"sweep_{args.scheme}_{args.case}_{init}_b{beta:g}_g{gamma:g}.csv")
    emit_csv(rows, out)
    return 1 if any(row.error for row in rows) else 0


def cmd_convergence(args: argparse.Namespace) -> int:
    preset = get_preset(args.preset) if args.preset else get_preset("fig")
    study = convergence_study(
        args.scheme,
        args.case,
        _pick(args.alpha, preset, "alpha", 10.0),
        beta=_pick(args.beta, preset, "beta", 10.0),
        gamma=_pick(args.gamma, preset, "gamma", 1.0),
        init=_pick(args.init, preset, "init", "darcy"),
        n_values=args.n_values,
    )
    console.print(_study_table(study))
    emit_plot_data(study, args.out or _default_out(f"convergence_{args.scheme}_{args.case}.dat"))
    return 0


def cmd_keps(args: argparse.Namespace) -> int:
    preset = get_preset(args.preset) if args.preset else get_preset("keps")
    n = _pick(args.n, preset, "n", 60)
    beta = _pick(args.beta, preset, "beta", 10.0)
    init = _pick(args.init, preset, "init", "zero")
    rows = keps_study(args.eps_k, alphas=args.alphas, init=init, n=n, beta=beta)
    console.print(_sweep_table(f"K_ε: ε_K={args.eps_k:g} N={n} β={beta:g} init={init}", rows))
    emit_csv(rows, args.out or _default_out(f"keps_{args.eps_k:g}_{init}.csv"))
    return 1 if any(row.error for row in rows) else 0


def cmd_mesh(args: argparse.Namespace) -> int:
    path = dump_mesh(build_unit_square_mesh(args.n), args.out)
    console.print(f"网格已写入 {path}")
    return 0


COMMANDS = {
    "run": cmd_run,
    "sweep-alpha": cmd_sweep,
    "convergence": cmd_convergence,
    "keps": cmd_keps,
    "mesh": cmd_mesh,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """命令行入口，返回退出码：0 成功，1 求解失败，2 参数错误"""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        set_level("DEBUG")

    try:
        _apply_solver_overrides(args)
        return COMMANDS[args.command](args)
    except ValueError as e:
        logger.error(f"参数错误: {str(e)}")
        err_console.print(f"[red]参数错误:[/red] {str(e)}")
        return 2
    except RuntimeError as e:
        logger.error(f"求解失败: {str(e)}")
        err_console.print(f"[red]求解失败:[/red] {str(e)}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
