"""
日志：控制台用 rich 输出到 stderr，文件按大小轮转。

所有模块通过 get_logger(__name__) 取得 logger，处理器只在第一次取得时挂载；
数值实验在线程池中并发执行，标准库 logging 本身是线程安全的。
"""

import logging
from logging.handlers import RotatingFileHandler
from functools import lru_cache
from typing import List
from rich.console import Console
from rich.logging import RichHandler
from src.config import config

ROOT_NAME = 'darcy_forchheimer'

log_config = config.get('LOG', {})
log_level = getattr(logging, str(log_config.get('level', 'INFO')).upper(), logging.INFO)
formatter = logging.Formatter(log_config.get('format', '%(asctime)s - %(name)s - %(levelname)s - %(message)s'))

# 日志走 stderr，stdout 只留给结果表格
_console = Console(stderr=True)
_managed: List[logging.Logger] = []


@lru_cache(maxsize=None)
def _console_handler(level: int) -> logging.Handler:
    handler = RichHandler(console=_console, show_path=False, markup=False, log_time_format='%H:%M:%S')
    handler.setLevel(level)
    return handler


# 同一个日志文件只能有一个轮转处理器
@lru_cache(maxsize=None)
def _file_handler(level: int) -> logging.Handler:
    handler = RotatingFileHandler(
        filename=log_config.get('file', f'logs/{ROOT_NAME}.log'),
        maxBytes=log_config.get('max_size', 10 * 1024 * 1024),
        backupCount=log_config.get('backup_count', 5),
        encoding='utf-8',
    )
    handler.setLevel(level)
    handler.setFormatter(formatter)
    return handler


def get_logger(name: str = ROOT_NAME) -> logging.Logger:
    """
    获取logger实例
    :param name: logger名称，一般传入 __name__
    :return: 已挂载控制台与文件处理器的logger
    """
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    logger.setLevel(log_level)
    logger.propagate = False
    logger.addHandler(_console_handler(log_level))
    logger.addHandler(_file_handler(log_level))
    _managed.append(logger)
    return logger


def set_level(level: str) -> None:
    """调整所有经 get_logger 创建的 logger 及其处理器的级别（命令行 --verbose 使用）

    Raises:
        ValueError: 未知的日志级别
    """
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ValueError(f"未知的日志级别: {level}")
    for logger in _managed:
        logger.setLevel(numeric)
        for handler in logger.handlers:
            handler.setLevel(numeric)


__all__ = ['get_logger', 'set_level']
