"""
CURVE-DESIGNS Configuration
Sectioned JSON configuration with built-in defaults, and logging setup
"""

import copy
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Union

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config" / "curvedesigns_config.json"
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class ConfigError(ValueError):
    """Unreadable or malformed configuration file"""


def default_config() -> Dict[str, Dict[str, Any]]:
    """Defaults used when no configuration file is found"""
    return {
        'system': {
            'name': 'CURVE-DESIGNS',
            'version': '1.0.0',
            'report_schema': 1,
        },
        'sampling': {
            'seed': 0,
            'sample_pairs': 100_000,
            'exhaustive_max_n': 11,
        },
        'guards': {
            'brute_aut_max_degree': 63,
            'group_max_n': 4,
            'intersection_max_degree': 63,
        },
        'search': {
            'conjugacy_budget': 200_000,
            'exhaustive_conjugacy_max_degree': 7,
        },
        'report': {
            'reciprocity_max_n': 10,
            'triple_intersection_max_n': 8,
            'action_identities_max_n': 8,
            'complement_max_n': 8,
            'duality_max_n': 8,
            'hyperplanes_max_n': 11,
            'max_workers': 1,
        },
        'monitoring': {
            'log_level': 'INFO',
            'log_format': LOG_FORMAT,
        },
        'ledger': {
            'enabled': False,
            'db_path': 'curvedesigns_runs.db',
        },
    }


def load_config(config_path: Optional[Union[str, Path]] = None) -> Dict[str, Dict[str, Any]]:
    """Load the JSON file over the defaults, section by section"""
    path = Path(config_path) if config_path is not None else DEFAULT_CONFIG_PATH
    config = default_config()
    try:
        with open(path, 'r') as f:
            loaded = json.load(f)
    except FileNotFoundError:
        if config_path is not None:
            raise ConfigError(f"Config file not found: {path}") from None
        logger.warning(f"Config file not found: {path}. Using defaults.")
        return config
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Invalid JSON in {path}: {exc}") from None

    if not isinstance(loaded, dict):
        raise ConfigError(f"{path}: top level must be an object")
    for section, values in loaded.items():
        if isinstance(values, dict) and isinstance(config.get(section), dict):
            config[section].update(values)
        else:
            config[section] = copy.deepcopy(values)
    return config


def config_hash(payload: Dict[str, Any]) -> str:
    """Stable short hash of a JSON-serialisable payload"""
    canonical = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def setup_logging(level: str = 'INFO', fmt: str = LOG_FORMAT) -> None:
    """Root logging to stderr; stdout stays reserved for results"""
    numeric = getattr(logging, str(level).upper(), None)
    if not isinstance(numeric, int):
        raise ConfigError(f"Unknown log level: {level}")
    logging.basicConfig(level=numeric, format=fmt, stream=sys.stderr)
