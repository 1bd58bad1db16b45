"""
Logger Setup - Cấu hình logging cho ứng dụng
"""

import logging
import sys
from pathlib import Path
from typing import Optional, Union

from appdirs import user_log_dir

LOG_FILE_NAME = "coherence_kit.log"


def setup_logger(
    name: str = "CoherenceKit",
    level: int = logging.WARNING,
    log_dir: Optional[Union[str, Path]] = None,
) -> logging.Logger:
    """
    Thiết lập logger cho ứng dụng.

    Console (stderr) theo `level`; file log luôn ghi DEBUG. stdout để dành
    cho báo cáo nên không có handler nào ghi vào đó.

    Args:
        name: Tên logger
        level: Mức độ logging trên console
        log_dir: Thư mục log (mặc định user_log_dir của CoherenceKit)

    Returns:
        Logger instance đã được cấu hình
    """
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)

    # Tránh duplicate handlers nếu gọi nhiều lần; chỉ cập nhật level console
    if logger.handlers:
        for handler in logger.handlers:
            if getattr(handler, "coherence_kit_console", False):
                handler.setLevel(level)
        return logger

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(logging.Formatter(
        '%(asctime)s - %(levelname)s - %(message)s',
        datefmt='%H:%M:%S'
    ))
    console_handler.coherence_kit_console = True
    logger.addHandler(console_handler)

    # File handler - ghi tất cả vào file; bỏ qua nếu không tạo được thư mục
    directory = Path(log_dir) if log_dir is not None else Path(user_log_dir("CoherenceKit", "ntd237"))
    try:
        directory.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(directory / LOG_FILE_NAME, encoding='utf-8')
    except OSError as e:
        logger.warning(f"File logging disabled: {e}")
        return logger
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    ))
    logger.addHandler(file_handler)

    logger.debug(f"Logger initialized. Log file: {directory / LOG_FILE_NAME}")
    return logger
