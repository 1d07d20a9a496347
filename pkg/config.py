# ==============================================================================
# FILE: config.py
# ROLE: Layered Configuration Manager
# DESCRIPTION:
# Builds the settings of a run from four layers, lowest to highest:
#   shipped default-config.yml < environment < user YAML file < CLI flags
# Logic:
# - Feature switches come in pairs: 'enable_<feature>' + '<value key>'.
#   Missing switch, false switch OR empty value -> feature off (built-in default).
# - Integer values <= 0 behind a switch also mean "off".
# - Every key a user file adds or changes is logged, old value vs new value.
# - Anything that cannot be read as the expected type is a ConfigError.
# ==============================================================================

import os
import sys
import yaml
import logging

from errors import ConfigError

# Initialize the logger for this specific module
logger = logging.getLogger(__name__)

TOOL_VERSION = "1.0.0"

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "default-config.yml")
LOG_FORMAT = '%(asctime)s - %(levelname)s - [%(threadName)s] %(message)s'

# Environment variables and the config keys they seed
ENV_KEYS = {
    "SCALEKIT_OUTPUT_DIR": "output_dir",
    "SCALEKIT_LOG_LEVEL": "log_level",
}


def configure_logging(level="INFO"):
    """Logs go to stderr; stdout and the result files never carry log lines."""
    numeric = logging.getLevelName(str(level).upper())
    if not isinstance(numeric, int):
        raise ConfigError(f"unknown log level '{level}'")
    logging.basicConfig(level=numeric, format=LOG_FORMAT, stream=sys.stderr, force=True)


class ConfigManager:
    """
    Reads the shipped defaults and an optional user file once, on creation.
    Call reload() to pick up edits to the user file.
    """
    def __init__(self, config_path=None, default_path=DEFAULT_CONFIG_PATH):
        self.config_path = config_path
        self.default_path = default_path
        self.raw_cfg = {}
        self.reload()

    def _read(self, path):
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f) or {}
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except yaml.YAMLError as e:
            raise ConfigError(f"failed to parse {path}: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must hold a mapping of key: value settings")
        return data

    def reload(self):
        cfg = self._read(self.default_path)

        # --- ENVIRONMENT LAYER ---
        for env_name, key in ENV_KEYS.items():
            value = os.getenv(env_name)
            if value:
                cfg[key] = value

        # --- USER FILE + CHANGE LOGGING ---
        if self.config_path:
            user_cfg = self._read(self.config_path)
            changes_found = False
            logger.info(f"Loading user config from {self.config_path}")
            for key, new_value in user_cfg.items():
                if key not in cfg:
                    logger.warning(f"  -> ADDED: '{key}' = {new_value} (not a known setting)")
                    changes_found = True
                elif cfg[key] != new_value:
                    logger.info(f"  -> CHANGED: '{key}' from '{cfg[key]}' to '{new_value}'")
                    changes_found = True
            if not changes_found:
                logger.info("  -> File loaded, but no values differ from the defaults.")
            cfg.update(user_cfg)

        self.raw_cfg = cfg

    def get_setting(self, enable_key, val_key, expected_type=str):
        """
        Strict Logic for retrieving switched settings:
        1. If 'enable_key' is missing, commented out, or False -> RETURN False.
        2. If 'val_key' is missing or Empty -> RETURN False.
        3. If 'val_key' is <= 0 (for Ints) -> RETURN False.
        """
        is_enabled = self.raw_cfg.get(enable_key, False)
        if not is_enabled:
            return False

        val = self.raw_cfg.get(val_key)
        if val is None or val == '':
            return False

        try:
            if expected_type == int:
                val = int(val)
                if val <= 0:
                    return False
            elif expected_type == float:
                val = float(val)
            elif expected_type == list:
                if isinstance(val, str):
                    val = [x.strip() for x in val.split(',') if x.strip()]
                if not val:
                    return False
        except (TypeError, ValueError):
            raise ConfigError(f"'{val_key}' must be of type {expected_type.__name__}, got {val!r}")

        return val

    # ==========================================================================
    # TYPED READERS
    # ==========================================================================
    def value(self, key, cast, default=None):
        val = self.raw_cfg.get(key, default)
        if val is None:
            return None
        if cast is bool and not isinstance(val, bool):
            raise ConfigError(f"'{key}' must be true or false, got {val!r}")
        try:
            return cast(val)
        except (TypeError, ValueError):
            raise ConfigError(f"'{key}' must be of type {cast.__name__}, got {val!r}")

    def values(self, key, cast, raw=None):
        """A list setting; a comma-separated string is accepted too."""
        val = self.raw_cfg.get(key) if raw is None else raw
        if val is None or val is False:
            return None
        if isinstance(val, str):
            val = [x.strip() for x in val.split(',') if x.strip()]
        if not isinstance(val, (list, tuple)):
            raise ConfigError(f"'{key}' must be a list, got {val!r}")
        try:
            return tuple(cast(x) for x in val)
        except (TypeError, ValueError):
            raise ConfigError(f"'{key}' must be a list of {cast.__name__}, got {val!r}")

    def fit_range(self, key):
        bounds = self.values(key, float)
        if bounds is None or len(bounds) != 2:
            raise ConfigError(f"'{key}' must be a [low, high] pair, got {self.raw_cfg.get(key)!r}")
        return bounds

    # ==========================================================================
    # CORE PROPERTIES
    # ==========================================================================
    @property
    def LOG_LEVEL(self): return str(self.raw_cfg.get('log_level', 'INFO')).upper()
    @property
    def OUTPUT_DIR(self): return self.raw_cfg.get('output_dir') or "./scalekit-output"
    @property
    def WORKERS(self): return self.value('workers', int, 1) or 1

    # --- Switched Features ---
    @property
    def DETREND_MODES(self): return self.get_setting('enable_fourier_detrend', 'fourier_modes_removed', int) or 0
    @property
    def DETREND_REMOVE_MEAN(self):
        return bool(self.raw_cfg.get('enable_fourier_detrend', False) and self.raw_cfg.get('fourier_remove_mean', False))
    @property
    def CUSTOM_SCALES(self):
        scales = self.get_setting('enable_custom_scales', 'custom_scales', list)
        return self.values('custom_scales', int, raw=scales) if scales else None
    @property
    def FIXED_BIN_COUNT(self): return self.get_setting('enable_fixed_bin_count', 'bin_count', int) or None
    @property
    def FIXED_COLLAPSE_ALPHA(self):
        # 0.0 is a valid exponent, only False means disabled
        alpha = self.get_setting('enable_fixed_collapse_alpha', 'collapse_alpha', float)
        return None if alpha is False else alpha

    def build_run_config(self, overrides=None):
        """
        Merges the file settings with CLI overrides (None means "not given")
        into a validated RunConfig.
        """
        from pipeline import RunConfig

        settings = {
            "overlapping": self.value('overlapping_returns', bool, True),
            "detrend_modes": self.DETREND_MODES,
            "detrend_remove_mean": self.DETREND_REMOVE_MEAN,
            "rolling_window": self.value('rolling_window', int, 250),
            "rolling_step": self.value('rolling_step', int, 25),
            "pdf_lags": self.values('pdf_lags', int),
            "mfdfa_input": self.value('mfdfa_input', str, 'returns'),
            "scales": self.CUSTOM_SCALES,
            "scale_count": self.value('scale_count', int, 20),
            "scale_min": self.value('scale_min', int, 10),
            "q_orders": self.values('q_orders', float),
            "q_zero": self.value('enable_q_zero', bool, False),
            "poly_order": self.value('poly_order', int, 1),
            "mfdfa_fit_range": self.fit_range('mfdfa_fit_range'),
            "break_threshold": self.value('break_threshold', float, 0.1),
            "structure_lags": self.values('structure_lags', int),
            "n_orders": self.values('structure_orders', float),
            "zeta_fit_range": self.fit_range('zeta_fit_range'),
            "nonlinearity_threshold": self.value('nonlinearity_threshold', float, 0.05),
            "bin_count": self.FIXED_BIN_COUNT,
            "support_quantile": self.value('support_quantile', float, 0.99),
            "micro_lags": self.values('micro_lags', int),
            "macro_lags": self.values('macro_lags', int),
            "collapse_alpha": self.FIXED_COLLAPSE_ALPHA,
            "collapse_threshold": self.value('collapse_threshold', float, 0.05),
            "central_sigmas": self.value('central_sigmas', float, 3.0),
            "min_bin_count": self.value('min_bin_count', int, 10),
            "levy_lags": self.values('levy_lags', int),
            "levy_boundary_tolerance": self.value('levy_boundary_tolerance', float, 0.1),
            "output_dir": self.OUTPUT_DIR,
            "workers": self.WORKERS,
        }
        # Keys missing from every file fall back to the RunConfig defaults
        settings = {k: v for k, v in settings.items() if v is not None}

        for key, val in (overrides or {}).items():
            if val is None:
                continue
            if key not in RunConfig.__dataclass_fields__:
                raise ConfigError(f"unknown setting '{key}'")
            settings[key] = val

        return RunConfig(**settings)
