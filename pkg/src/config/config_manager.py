"""
Configuration Manager - Quản lý cấu hình người dùng

Thứ tự ưu tiên: cờ CLI > biến môi trường > file config > template > hằng số
"""

import copy
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

from appdirs import user_config_dir

from src.core.convex_roof import SolverConfig
from src.utils.workers import THREADS_ENV_VAR


class ConfigManager:
    """
    Quản lý việc lưu/đọc cấu hình người dùng.
    """

    # Tham số cấu hình cố định ở đầu file
    CONFIG_VERSION = "1.1"
    DEFAULT_RESTARTS = 32
    DEFAULT_SEED = 7
    DEFAULT_MAX_ITERATIONS = 200
    DEFAULT_SIZE_MARGIN = 2
    DEFAULT_VALUE_TOLERANCE = 1e-15
    DEFAULT_GRADIENT_TOLERANCE = 1e-12
    DEFAULT_EIGEN_SWEEPS = 100
    DEFAULT_ROOT_ITERATIONS = 500
    DEFAULT_LOG_LEVEL = "WARNING"
    RETIRED_SOLVER_KEYS = ("max_sweeps", "step_tolerance")

    def __init__(self, config_file: Optional[Union[str, Path]] = None,
                 template_path: Optional[Union[str, Path]] = None):
        """
        Khởi tạo ConfigManager

        Args:
            config_file: Đường dẫn file config (mặc định trong user_config_dir)
            template_path: Template mặc định (mặc định resources/config_template.json)
        """
        self.logger = logging.getLogger("CoherenceKit.ConfigManager")

        if config_file is None:
            self.config_dir = Path(user_config_dir("CoherenceKit", "ntd237"))
            self.config_file = self.config_dir / "config.json"
        else:
            self.config_file = Path(config_file)
            self.config_dir = self.config_file.parent

        if template_path is None:
            template_path = Path(__file__).parent.parent.parent / "resources" / "config_template.json"
        self.template_path = Path(template_path)

        self.config = self.load_config()
        self.logger.debug(f"ConfigManager initialized. Config file: {self.config_file}")

    def load_config(self) -> Dict[str, Any]:
        """
        Đọc cấu hình từ file. Dùng mặc định nếu không tồn tại hoặc hỏng.

        Returns:
            Dictionary chứa cấu hình
        """
        if not self.config_file.exists():
            self.logger.debug("Config file not found. Using defaults from template.")
            return self._create_default_config()
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                config = json.load(f)
            if not isinstance(config, dict):
                raise ValueError("top-level JSON value is not an object")
        except (OSError, ValueError) as e:
            self.logger.error(f"Error loading config: {e}. Using default config.")
            return self._create_default_config()

        config = self._validate_and_migrate(config)
        self.logger.debug("Config loaded successfully")
        return config

    def _hardcoded_defaults(self) -> Dict[str, Any]:
        return {
            "version": self.CONFIG_VERSION,
            "solver": {
                "restarts": self.DEFAULT_RESTARTS,
                "seed": self.DEFAULT_SEED,
                "max_iterations": self.DEFAULT_MAX_ITERATIONS,
                "size_margin": self.DEFAULT_SIZE_MARGIN,
                "value_tolerance": self.DEFAULT_VALUE_TOLERANCE,
                "gradient_tolerance": self.DEFAULT_GRADIENT_TOLERANCE,
            },
            "eigensolver": {"max_sweeps": self.DEFAULT_EIGEN_SWEEPS},
            "root_finder": {"max_iterations": self.DEFAULT_ROOT_ITERATIONS},
            "threads": None,
            "log_level": self.DEFAULT_LOG_LEVEL,
        }

    def _create_default_config(self) -> Dict[str, Any]:
        """
        Tạo cấu hình mặc định: template nếu đọc được, không thì hằng số.
        """
        defaults = self._hardcoded_defaults()
        try:
            if self.template_path.exists():
                with open(self.template_path, 'r', encoding='utf-8') as f:
                    template = json.load(f)
                _fill_missing(template, defaults)
                return template
        except (OSError, ValueError) as e:
            self.logger.warning(f"Could not load template: {e}. Using hardcoded defaults.")
        return defaults

    def _validate_and_migrate(self, config: Dict[str, Any]) -> Dict[str, Any]:
        """
        Validate và migrate config cũ sang version mới nếu cần.
        """
        config_version = config.get("version", "0.0")
        if config_version != self.CONFIG_VERSION:
            self.logger.info(f"Migrating config from version {config_version} to {self.CONFIG_VERSION}")
            config["version"] = self.CONFIG_VERSION
            solver = config.get("solver")
            if isinstance(solver, dict):
                # 1.0 -> 1.1: bỏ các key của bộ giải cũ
                for old in self.RETIRED_SOLVER_KEYS:
                    if solver.pop(old, None) is not None:
                        self.logger.info(f"Dropped retired config key: solver.{old}")

        added = _fill_missing(config, self._create_default_config())
        for key in added:
            self.logger.debug(f"Added missing config key: {key}")
        return config

    def reset(self):
        """Đưa cấu hình về mặc định (template hoặc hằng số)."""
        self.config = self._create_default_config()

    def save_config(self) -> bool:
        """
        Ghi config vào file (UTF-8, indent 2).

        Returns:
            True nếu ghi thành công
        """
        try:
            self.config_dir.mkdir(parents=True, exist_ok=True)
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(self.config, f, indent=2, ensure_ascii=False)
            self.logger.debug("Config saved successfully")
            return True
        except OSError as e:
            self.logger.error(f"Error saving config: {e}")
            return False

    # ===== GETTERS & SETTERS =====

    def get(self, key: str, default: Any = None) -> Any:
        """
        Lấy giá trị config theo key; hỗ trợ key dạng "solver.restarts".
        """
        node: Any = self.config
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def set(self, key: str, value: Any):
        node = self.config
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value

    # ===== SPECIFIC GETTERS =====

    @property
    def threads(self) -> Optional[int]:
        """Số worker: env COHERENCE_KIT_THREADS > file config > None (số CPU)."""
        raw = os.environ.get(THREADS_ENV_VAR)
        if raw:
            try:
                value = int(raw)
                if value > 0:
                    return value
            except ValueError:
                pass
            self.logger.warning(f"Ignoring invalid {THREADS_ENV_VAR}={raw!r}")
        value = self.get("threads")
        return int(value) if value else None

    @property
    def log_level(self) -> int:
        name = str(self.get("log_level", self.DEFAULT_LOG_LEVEL)).upper()
        level = logging.getLevelName(name)
        return level if isinstance(level, int) else logging.WARNING

    @property
    def root_max_iterations(self) -> int:
        return int(self.get("root_finder.max_iterations", self.DEFAULT_ROOT_ITERATIONS))

    def solver_config(self, **overrides) -> SolverConfig:
        """
        SolverConfig từ file config; override có giá trị None bị bỏ qua.
        """
        values = {
            "restarts": int(self.get("solver.restarts", self.DEFAULT_RESTARTS)),
            "seed": int(self.get("solver.seed", self.DEFAULT_SEED)),
            "max_iterations": int(self.get("solver.max_iterations", self.DEFAULT_MAX_ITERATIONS)),
            "size_margin": int(self.get("solver.size_margin", self.DEFAULT_SIZE_MARGIN)),
            "value_tolerance": float(self.get("solver.value_tolerance", self.DEFAULT_VALUE_TOLERANCE)),
            "gradient_tolerance": float(self.get("solver.gradient_tolerance", self.DEFAULT_GRADIENT_TOLERANCE)),
            "eigen_max_sweeps": int(self.get("eigensolver.max_sweeps", self.DEFAULT_EIGEN_SWEEPS)),
            "threads": self.threads,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return SolverConfig(**values)


def _fill_missing(config: Dict[str, Any], defaults: Dict[str, Any], prefix: str = "") -> list:
    """Thêm các key thiếu (đệ quy), trả về danh sách key đã thêm."""
    added = []
    for key, value in defaults.items():
        if key not in config:
            config[key] = copy.deepcopy(value)
            added.append(prefix + key)
        elif isinstance(value, dict) and isinstance(config[key], dict):
            added.extend(_fill_missing(config[key], value, f"{prefix}{key}."))
    return added
