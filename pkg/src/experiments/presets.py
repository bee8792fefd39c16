from dataclasses import dataclass
from typing import Dict, Optional, Tuple


@dataclass(frozen=True)
class Preset:
    """一组数值实验的默认参数，命令行显式给出的参数优先"""

    name: str
    description: str
    beta: float
    gamma: float = 1.0
    init: str = "zero"
    alpha: Optional[float] = None
    n: Optional[int] = None
    n_values: Optional[Tuple[int, ...]] = None


PRESETS: Dict[str, Preset] = {
    "t1": Preset("t1", "β=20, γ=20，零初值，N=60", beta=20.0, gamma=20.0, init="zero", n=60),
    "t2": Preset("t2", "β=20, γ=20，Darcy 初值，N=60", beta=20.0, gamma=20.0, init="darcy", n=60),
    "t3": Preset("t3", "β=10, γ=1，Darcy 初值，N=60", beta=10.0, gamma=1.0, init="darcy", n=60),
    "fig": Preset(
        "fig",
        "收敛阶：α=10, β=10, γ=1，Darcy 初值，N=60..200",
        beta=10.0,
        gamma=1.0,
        init="darcy",
        alpha=10.0,
        n_values=(60, 80, 100, 120, 140, 160, 180, 200),
    ),
    "keps": Preset("keps", "间断渗透率：N=60, β=10", beta=10.0, n=60),
}


def get_preset(name: str) -> Preset:
    if name not in PRESETS:
        raise ValueError(f"未知的预设: {name}，可选 {', '.join(PRESETS)}")
    return PRESETS[name]
