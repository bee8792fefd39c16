from typing import Optional
import numpy as np


def forchheimer_drag(u: np.ndarray, q: float = 1.0, axis: Optional[int] = -1) -> np.ndarray:
    """Forchheimer 项 |u|^q u

    Args:
        u: 标量数组（axis=None）或在 axis 维上存放分量的向量数组
        q: 指数，q >= 0；Darcy-Forchheimer 方程取 q = 1
        axis: 向量分量所在维度，None 表示逐元素的标量情形
    """
    if q < 0:
        raise ValueError(f"指数 q 必须非负，当前为 {q}")
    u = np.asarray(u, dtype=float)
    if axis is None:
        magnitude = np.abs(u)
    else:
        magnitude = np.expand_dims(np.linalg.norm(u, axis=axis), axis)
    return magnitude ** q * u


def speed(u: np.ndarray) -> np.ndarray:
    """|u|，向量分量在最后一维"""
    return np.linalg.norm(u, axis=-1)
