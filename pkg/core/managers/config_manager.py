import logging
import os

from dotenv import dotenv_values

from core.configuration.configuration import env_bool, env_float
from core.exceptions.exceptions import ModelError

logger = logging.getLogger(__name__)


class AppConfig(dict):
    """Uppercase settings of a metro application, filled from a config class."""

    def from_object(self, obj):
        for key in dir(obj):
            if key.isupper():
                self[key] = getattr(obj, key)

    def from_mapping(self, mapping):
        for key, value in mapping.items():
            if key.isupper():
                self[key] = value


class ConfigManager:
    def __init__(self, app):
        self.app = app

    def load_config(self, config_name=None):
        # If config_name is not provided, use the environment variable METRO_ENV
        if config_name is None:
            config_name = os.getenv('METRO_ENV', 'development')

        self.app.config.from_object(config_class(config_name))

    def load_file(self, path):
        """Reads a flat key=value file and splits it into settings and option defaults."""
        values = dotenv_values(path)
        settings = {}
        options = {}
        for key, raw in values.items():
            if raw is None:
                logger.warning(f"Config file {path}: key '{key}' has no value, ignored")
                continue
            if key.isupper():
                if key not in self.app.config:
                    logger.warning(f"Config file {path}: unknown setting '{key}' ignored")
                    continue
                settings[key] = coerce_setting(self.app.config[key], raw, key)
            else:
                options[key] = raw
        self.app.config.from_mapping(settings)
        return options


def coerce_setting(current, raw, key):
    try:
        if isinstance(current, bool):
            return raw.strip().lower() in ('1', 'true', 'yes', 'on')
        if isinstance(current, float):
            return float(raw)
        if isinstance(current, int):
            return int(raw)
    except ValueError as exc:
        raise ModelError(f"Invalid value for {key}: {raw!r}") from exc
    return raw


def config_class(config_name):
    if config_name == 'testing':
        return TestingConfig
    if config_name == 'production':
        return ProductionConfig
    return DevelopmentConfig


def default_config():
    config = AppConfig()
    config.from_object(config_class(os.getenv('METRO_ENV', 'development')))
    return config


class Config:
    FD_STEP = env_float('METRO_FD_STEP', 1e-6)
    RICHARDSON = env_bool('METRO_RICHARDSON', False)
    QUADRATURE = os.getenv('METRO_QUADRATURE', 'trapezoid')
    PROBABILITY_FLOOR = 1e-15
    SINGULAR_DERIVATIVE = 1e-12
    BOOTSTRAP_RESAMPLES = 1000
    LOG_FILE = os.getenv('METRO_LOG_FILE', 'metro.log')
    LOG_LEVEL = os.getenv('METRO_LOG_LEVEL', 'INFO')
    DEBUG = env_bool('METRO_DEBUG', False)
    TESTING = False


class DevelopmentConfig(Config):
    LOG_LEVEL = os.getenv('METRO_LOG_LEVEL', 'DEBUG')


class TestingConfig(Config):
    TESTING = True
    LOG_FILE = ''


class ProductionConfig(Config):
    DEBUG = False
    LOG_LEVEL = os.getenv('METRO_LOG_LEVEL', 'WARNING')
