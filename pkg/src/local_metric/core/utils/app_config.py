"""
Copyright 2025 local-metric contributors
"""
import yaml
import os
import importlib.resources
from functools import lru_cache
import logging
from logging.handlers import RotatingFileHandler
import datetime
import random
import string
from typing import Optional
import toml
from pydantic import ValidationError
from local_metric.core.models.training_model import TrainConfig
from local_metric.core.utils.errors import ConfigurationError

_config = None

def generate_session_id() -> tuple[str, str]:
    """Generate a session ID in format mm-dd-yy-HH-MM-SS-XXXX where XXXX is random alphanumeric"""
    date_str = datetime.datetime.now().strftime("%m-%d-%y-%H-%M-%S")
    random_str = ''.join(random.choices(string.ascii_letters + string.digits, k=4))
    return f"{date_str}-{random_str}", random_str

@lru_cache
def get_config() -> dict:
  """
  Reads the application configuration from the yaml file named by $CONFIG_FILE (default ./config.yaml).
  When the file does not exist the packaged template is used, so the CLI works out of the box.
  return: a key-value map
  """
  global _config
  if _config is None:
      config_file = os.getenv("CONFIG_FILE", "./config.yaml")
      if config_file and os.path.exists(config_file):
        with open(config_file) as f:
          _config = yaml.load(f, Loader=yaml.FullLoader) or {}
      else:
        template = importlib.resources.files("local_metric.core.templates").joinpath("config_tmpl.yaml")
        _config = yaml.safe_load(template.read_text())
  return _config

def _resolve_home() -> str:
    home = os.getenv("LOCAL_METRIC_HOME") or get_config().get("app", {}).get("home")
    if home:
        return os.path.expanduser(home)
    return os.path.join(os.path.expanduser("~"), '.local_metric')

local_metric_dir = _resolve_home()
log_dir = os.path.join(local_metric_dir, 'logs')
log_name, session_id = generate_session_id()
session_log_dir = os.path.join(log_dir, log_name)

logger = logging.getLogger("local_metric")
logger.propagate = False  # Prevent propagation to root logger
os.makedirs(session_log_dir, exist_ok=True)
logger.setLevel(get_config().get("app", {}).get("logging", "INFO"))
log_file_path = os.path.join(session_log_dir, "local_metric_cli.log")
file_handler = RotatingFileHandler(
    log_file_path,
    maxBytes=5*1024*1024,  # 5MB
    backupCount=3        # Keep up to 3 backup files
)
file_handler.setLevel(logging.DEBUG)
file_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s %(pathname)s:%(lineno)d - %(funcName)s() - %(message)s'))
logger.addHandler(file_handler)
logger.info(f"LOCAL_METRIC session {session_id} started, logs folder is {session_log_dir}")


def load_train_config(config_path: Optional[str] = None, overrides: Optional[dict] = None) -> TrainConfig:
    """
    Training configuration, later sources win: built-in defaults, the `training` section of the
    app config, the optional toml / yaml file at config_path, then the explicit overrides
    (None values are ignored so unset CLI flags keep the configured value).
    """
    values = dict(get_config().get("training") or {})
    if config_path:
        values.update(_read_settings_file(config_path))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return TrainConfig(**values)
    except ValidationError as e:
        logger.error(f"Invalid training configuration {values}: {e}")
        raise ConfigurationError(f"invalid training configuration: {e}") from e


def get_benchmark_settings() -> dict:
    settings = {"repeats": 10, "train_fraction": 0.6, "statistics": "train"}
    settings.update(get_config().get("benchmark") or {})
    return settings


def _read_settings_file(config_path: str) -> dict:
    try:
        with open(config_path) as f:
            if config_path.endswith((".yaml", ".yml")):
                content = yaml.safe_load(f) or {}
            else:
                content = toml.load(f)
    except (OSError, yaml.YAMLError, toml.TomlDecodeError) as e:
        logger.error(f"Cannot read configuration file {config_path}: {e}")
        raise ConfigurationError(f"cannot read configuration file {config_path}: {e}") from e
    if not isinstance(content, dict):
        raise ConfigurationError(f"configuration file {config_path} must hold key = value settings")
    return dict(content.get("training", content))
