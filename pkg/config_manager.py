from pathlib import Path
import json
from typing import Any, Dict
import copy
import logging

import yaml

from enumeration import enumeration_workers, threads_from_environment
from qp_errors import InvalidInputError
from qp_types import ForgeSpec

PRESET_KEYS = ("magnitude", "density", "strict_floor", "zero_psd_probability")


class ConfigManager:
    def __init__(self, config_file: str = "boxqp_config.json"):
        self.config_file = Path(config_file)
        self.default_config = {
            "presets": {
                "forge": {
                    "default": {
                        "magnitude": 1.0,
                        "density": 1.0,
                        "strict_floor": 0.1,
                        "description": "Dense multipliers on [0, 1]"
                    },
                    "sparse": {
                        "magnitude": 1.0,
                        "density": 0.3,
                        "strict_floor": 0.1,
                        "description": "Each free multiplier kept with probability 0.3"
                    },
                    "wide": {
                        "magnitude": 10.0,
                        "density": 1.0,
                        "strict_floor": 0.1,
                        "description": "Multipliers on [0, 10]"
                    },
                    "tight_floor": {
                        "magnitude": 1.0,
                        "density": 1.0,
                        "strict_floor": 0.5,
                        "description": "Strictly positive parameters at least 0.5"
                    }
                }
            },
            "settings": {
                "psd_tol": 1e-8,
                "partition_tol": 1e-9,
                "cert_tol": 1e-8,
                "exactness_tol": 1e-7,
                "interior_margin": 1e-9,
                "rlt_dimension_cap": 12,
                "global_dimension_cap": 12,
                "grid_dimension_cap": 4,
                "workers": 4,
                "log_file": None,
                "log_level": "WARNING"
            }
        }
        self.config = self.load_config()

    def _is_yaml(self) -> bool:
        return self.config_file.suffix.lower() in (".yaml", ".yml")

    def load_config(self) -> Dict:
        """Load configuration from file or return defaults"""
        if self.config_file.exists():
            try:
                with open(self.config_file, 'r') as f:
                    loaded = yaml.safe_load(f) if self._is_yaml() else json.load(f)
                return self._merge_defaults(loaded or {})
            except Exception as e:
                logging.error(f"Error loading config: {e}")
                return copy.deepcopy(self.default_config)
        return copy.deepcopy(self.default_config)

    def _merge_defaults(self, loaded: Dict) -> Dict:
        """Settings and presets missing from the file keep their defaults"""
        config = copy.deepcopy(self.default_config)
        config["settings"].update(loaded.get("settings") or {})
        for category, presets in (loaded.get("presets") or {}).items():
            config["presets"].setdefault(category, {}).update(presets)
        return config

    def save_config(self) -> None:
        """Save current configuration to file"""
        with open(self.config_file, 'w') as f:
            if self._is_yaml():
                yaml.safe_dump(self.config, f, sort_keys=False)
            else:
                json.dump(self.config, f, indent=2)

    def add_preset(self, category: str, name: str, magnitude: float,
                   density: float, strict_floor: float, description: str,
                   zero_psd_probability: float = 0.0) -> None:
        """Add a new preset to the configuration"""
        ForgeSpec(seed=0, magnitude=magnitude, density=density, strict_floor=strict_floor,
                  zero_psd_probability=zero_psd_probability)
        if category not in self.config["presets"]:
            self.config["presets"][category] = {}

        self.config["presets"][category][name] = {
            "magnitude": magnitude,
            "density": density,
            "strict_floor": strict_floor,
            "zero_psd_probability": zero_psd_probability,
            "description": description
        }
        self.save_config()

    def get_presets(self, category: str) -> Dict:
        """Get all presets for a category"""
        return self.config["presets"].get(category, {})

    def forge_spec(self, preset: str, seed: int, **overrides: Any) -> ForgeSpec:
        """ForgeSpec from a forge preset; non-None overrides win"""
        presets = self.get_presets("forge")
        if preset not in presets:
            raise InvalidInputError(f"unknown preset {preset!r}; available: {', '.join(sorted(presets))}",
                                    code="unknown_preset")
        params = {key: presets[preset][key] for key in PRESET_KEYS if key in presets[preset]}
        params.update({key: value for key, value in overrides.items() if value is not None})
        return ForgeSpec(seed=seed, **params)

    def get_setting(self, key: str, default: Any = None) -> Any:
        """Get a setting value with optional default"""
        try:
            return self.config["settings"].get(key, default)
        except (KeyError, TypeError, AttributeError):
            return default

    def update_setting(self, key: str, value: Any) -> None:
        """Update a setting value"""
        self.config["settings"][key] = value
        self.save_config()

    def workers(self) -> int:
        """Enumeration workers; THREADS in the environment overrides the setting"""
        threads = threads_from_environment()
        return threads if threads is not None else enumeration_workers(self.get_setting("workers"))
