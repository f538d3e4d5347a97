# srlora_tools/config.py
"""
Centralized process configuration for srlora-tools.

This module provides a single source of truth for process-wide settings
(logging, numerical kernel limits, worker counts), reading from environment
variables and providing defaults. Per-run hyperparameters live in
``srlora_tools.trainer.run_config``.
"""

import os
from typing import Any, Dict
from dotenv import load_dotenv

# Load environment variables from .env file if it exists
load_dotenv()


class Config:
    """Centralized configuration class for srlora-tools."""

    def __init__(self):
        """Initialize configuration with environment variables."""
        self._config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from environment variables."""
        return {
            # Logging
            "LOG_LEVEL": os.getenv("LOG_LEVEL", "INFO"),
            "LOG_FILE": os.getenv("LOG_FILE", ""),
            "LOG_FORMAT": os.getenv(
                "LOG_FORMAT",
                "{time:YYYY-MM-DD HH:mm:ss} - {extra[module]} - {level} - {message}",
            ),

            # Jacobi SVD
            "SVD_MAX_SWEEPS": int(os.getenv("SVD_MAX_SWEEPS", "60")),
            "SVD_TOLERANCE": float(os.getenv("SVD_TOLERANCE", "1e-12")),

            # Runners
            "COMPARE_MAX_WORKERS": int(os.getenv("COMPARE_MAX_WORKERS", "4")),
            "VERIFY_SEED": int(os.getenv("VERIFY_SEED", "20240601")),

            # Feature flags
            "ENABLE_LOGGING": os.getenv("ENABLE_LOGGING", "true").lower() == "true",
        }

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value by key."""
        return self._config.get(key, default)

    def get_log_config(self) -> Dict[str, Any]:
        """Get logging configuration."""
        return {
            "level": self.get("LOG_LEVEL"),
            "file": self.get("LOG_FILE"),
            "format": self.get("LOG_FORMAT"),
            "enabled": self.get("ENABLE_LOGGING"),
        }

    def get_svd_config(self) -> Dict[str, Any]:
        """Get Jacobi SVD limits."""
        return {
            "max_sweeps": self.get("SVD_MAX_SWEEPS"),
            "tolerance": self.get("SVD_TOLERANCE"),
        }

    def is_feature_enabled(self, feature: str) -> bool:
        """Check if a feature is enabled."""
        feature_map = {
            "logging": "ENABLE_LOGGING",
        }
        return self.get(feature_map.get(feature.lower(), ""), False)


# Global configuration instance
config = Config()


def get_config() -> Config:
    """Get the global configuration instance."""
    return config