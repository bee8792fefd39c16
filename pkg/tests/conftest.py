import sys
from pathlib import Path

# 添加项目根目录到 Python 路径
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest
from src.config import config
from src.mesh.triangle_mesh import build_unit_square_mesh


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def mesh1():
    return build_unit_square_mesh(1)


@pytest.fixture(scope="session")
def mesh4():
    return build_unit_square_mesh(4)


@pytest.fixture(scope="session")
def mesh8():
    return build_unit_square_mesh(8)


@pytest.fixture
def restore_config():
    """测试中通过 update_config 修改的配置在结束后恢复"""
    saved = {section: dict(config.get(section)) for section in ("SOLVER", "EXPERIMENT")}
    yield config
    for section, values in saved.items():
        config.update_config(section, values, validate=False)


@pytest.fixture
def zero_data():
    """(f, b) 全为零的数据"""

    def f(x, y):
        return np.zeros(np.broadcast(x, y).shape + (2,))

    def b(x, y):
        return np.zeros(np.broadcast(x, y).shape)

    return f, b
