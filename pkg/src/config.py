import copy
import os
import json
import logging
from pathlib import Path
from typing import Dict, Any, List, Optional
from dataclasses import dataclass
from dotenv import load_dotenv


# SuperLU 支持的列置换策略
PERMC_SPECS = ("NATURAL", "MMD_ATA", "MMD_AT_PLUS_A", "COLAMD")


@dataclass
class ConfigValidationError:
    key: str
    message: str


def _parse_float_list(raw: str) -> List[float]:
    return [float(x) for x in raw.split(",") if x.strip()]


def _parse_int_list(raw: str) -> List[int]:
    return [int(x) for x in raw.split(",") if x.strip()]


def _assign(target: Dict[str, Any], key: str, value: Any) -> None:
    """按 "SECTION.key" 形式的键写入嵌套字典，缺失的中间层自动创建"""
    parts = key.split('.')
    for part in parts[:-1]:
        target = target.setdefault(part, {})
    target[parts[-1]] = value


class Config:
    """配置管理类"""

    def __init__(self):
        self._config: Dict[str, Any] = {}
        self.load_config()
        self._validate_config()
        self._log_config()

    def load_config(self) -> None:
        """加载配置"""
        # 确定环境
        env = os.getenv("PYTHON_ENV", "development")

        # 项目根路径
        root_path = Path(__file__).parent.parent

        # 基础配置
        base_env_path = root_path / ".env"
        if base_env_path.exists():
            load_dotenv(base_env_path)

        # 环境特定配置
        env_file = root_path / f".env.{env}"
        if env_file.exists():
            load_dotenv(env_file, override=True)

        # 本地开发配置
        local_env = root_path / ".env.local"
        if local_env.exists():
            load_dotenv(local_env, override=True)

        self._load_app_config()
        self._load_solver_config()
        self._load_experiment_config()
        self._load_log_config()

    def _load_app_config(self) -> None:
        """加载应用配置"""
        self._config["APP"] = {
            "name": os.getenv("APP_NAME", "darcy-forchheimer-fem"),
            "env": os.getenv("PYTHON_ENV", "development"),
        }

    def _load_solver_config(self) -> None:
        """加载求解器配置（Picard 迭代与罚参数）"""
        self._config["SOLVER"] = {
            "tol": float(os.getenv("DF_TOL", "1e-5")),
            "max_iter": int(os.getenv("DF_MAX_ITER", "10000")),
            "penalty": float(os.getenv("DF_PENALTY", "1e-8")),
            "permc_spec": os.getenv("DF_PERMC_SPEC", "COLAMD"),
            "log_every": int(os.getenv("DF_LOG_EVERY", "100")),
        }

    def _load_experiment_config(self) -> None:
        """加载数值实验配置"""
        self._config["EXPERIMENT"] = {
            "output_dir": os.getenv("DF_OUTPUT_DIR", "results"),
            "workers": int(os.getenv("DF_WORKERS", "4")),
            "alphas": os.getenv("DF_ALPHAS", "0.001,0.01,0.1,1,10,100,1000"),
            "n_values": os.getenv("DF_N_VALUES", "60,80,100,120,140,160,180,200"),
            "default_n": int(os.getenv("DF_N", "60")),
        }

    def _load_log_config(self) -> None:
        """加载日志配置"""
        self._config["LOG"] = {
            "level": os.getenv("LOG_LEVEL", "INFO"),
            "file": os.getenv("LOG_FILE", "logs/darcy_forchheimer.log"),
            "max_size": int(os.getenv("LOG_MAX_SIZE", str(10 * 1024 * 1024))),  # 默认10MB
            "backup_count": int(os.getenv("LOG_BACKUP_COUNT", "5")),
            "format": os.getenv(
                "LOG_FORMAT",
                "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
            ),
        }

        # 确保日志目录存在
        log_dir = Path(self._config["LOG"]["file"]).parent
        log_dir.mkdir(parents=True, exist_ok=True)

    def _validate_config(self, candidate: Optional[Dict[str, Any]] = None) -> None:
        """验证配置有效性，candidate 为空时验证当前配置"""
        cfg = self._config if candidate is None else candidate
        errors: List[ConfigValidationError] = []

        solver = cfg.get("SOLVER", {})
        if not solver.get("tol", 0) > 0:
            errors.append(ConfigValidationError("SOLVER.tol", "收敛容差必须大于0"))
        if int(solver.get("max_iter", 0)) < 1:
            errors.append(ConfigValidationError("SOLVER.max_iter", "最大迭代次数必须至少为1"))
        if not solver.get("penalty", 0) > 0:
            errors.append(ConfigValidationError("SOLVER.penalty", "罚参数必须大于0"))
        if solver.get("permc_spec") not in PERMC_SPECS:
            errors.append(ConfigValidationError(
                "SOLVER.permc_spec",
                f"列置换策略必须是 {', '.join(PERMC_SPECS)} 之一"
            ))
        if int(solver.get("log_every", 0)) < 1:
            errors.append(ConfigValidationError("SOLVER.log_every", "日志间隔必须至少为1"))

        experiment = cfg.get("EXPERIMENT", {})
        if not experiment.get("output_dir"):
            errors.append(ConfigValidationError("EXPERIMENT.output_dir", "输出目录不能为空"))
        if int(experiment.get("workers", 0)) < 1:
            errors.append(ConfigValidationError("EXPERIMENT.workers", "并发数必须至少为1"))
        if int(experiment.get("default_n", 0)) < 1:
            errors.append(ConfigValidationError("EXPERIMENT.default_n", "网格剖分数必须至少为1"))

        try:
            if not _parse_float_list(experiment.get("alphas", "")):
                errors.append(ConfigValidationError("EXPERIMENT.alphas", "alpha 列表不能为空"))
        except ValueError:
            errors.append(ConfigValidationError("EXPERIMENT.alphas", "alpha 列表必须是逗号分隔的数字"))

        try:
            n_values = _parse_int_list(experiment.get("n_values", ""))
            if not n_values or any(n < 1 for n in n_values) or \
                    any(b <= a for a, b in zip(n_values, n_values[1:])):
                errors.append(ConfigValidationError(
                    "EXPERIMENT.n_values",
                    "网格序列必须是严格递增的正整数"
                ))
        except ValueError:
            errors.append(ConfigValidationError("EXPERIMENT.n_values", "网格序列必须是逗号分隔的整数"))

        log_config = cfg.get("LOG", {})
        if not isinstance(logging.getLevelName(log_config.get("level", "")), int):
            errors.append(ConfigValidationError("LOG.level", "无效的日志级别"))

        # 如果有错误，抛出异常
        if errors:
            error_messages = "\n".join(f"{e.key}: {e.message}" for e in errors)
            raise ValueError(f"配置验证失败:\n{error_messages}")

    def update_config(self, key: str, value: Any, validate: bool = True) -> None:
        """
        更新配置项

        Args:
            key: 配置项键名，支持 "SOLVER.tol" 形式的嵌套键
            value: 配置项的新值
            validate: 是否在更新后进行配置验证，默认为True

        Raises:
            ValueError: 当validate=True且更新后的配置验证失败时抛出，此时配置保持不变
        """
        if validate:
            candidate = copy.deepcopy(self._config)
            _assign(candidate, key, value)
            self._validate_config(candidate)
        _assign(self._config, key, value)

    def get_required(self, key: str) -> Any:
        """获取必需的配置项，如果不存在则抛出异常"""
        value = self.get(key)
        if value is None:
            raise KeyError(f"必需的配置项 {key} 未设置")
        return value

    def get_int(self, key: str, default: Optional[int] = None) -> int:
        """获取整数类型的配置"""
        try:
            return int(self.get(key, default))
        except (TypeError, ValueError):
            return default if default is not None else 0

    def get_float_list(self, key: str) -> List[float]:
        """获取逗号分隔的浮点数列表配置"""
        return _parse_float_list(self.get(key, ""))

    def get_int_list(self, key: str) -> List[int]:
        """获取逗号分隔的整数列表配置"""
        return _parse_int_list(self.get(key, ""))

    def get(self, key: str, default: Any = None) -> Any:
        """获取配置值，支持 "SOLVER.tol" 形式的嵌套键"""
        node: Any = self._config
        for part in key.split('.'):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    @property
    def solver(self) -> Dict[str, Any]:
        return self._config["SOLVER"]

    @property
    def experiment(self) -> Dict[str, Any]:
        return self._config["EXPERIMENT"]

    def _log_config(self) -> None:
        """输出配置信息到日志"""
        logger = logging.getLogger(__name__)
        logger.debug("=== 系统配置信息 ===")
        for key, value in sorted(self._config.items()):
            logger.debug(f"{key}: {json.dumps(value, ensure_ascii=False)}")
        logger.debug("=== 配置加载完成 ===")


# 全局配置实例
config = Config()
