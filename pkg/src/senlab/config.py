"""Configuration management for senlab."""

import json
import logging
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional


logger = logging.getLogger(__name__)

THREADS_ENV = "SENLAB_THREADS"
MAX_DEFAULT_THREADS = 4


@dataclass
class Config:
    """Default parameters for verification runs."""

    p: int = 5
    N: int = 20  # absolute precision, in powers of p
    D: int = 12  # truncation degree for series
    seed: int = 0
    threads: Optional[int] = None  # None: one worker per CPU, at most 4

    @classmethod
    def get_config_path(cls) -> Path:
        """Get the path to the config file."""
        config_dir = Path.home() / ".config" / "senlab"
        return config_dir / "config.json"

    @classmethod
    def load(cls) -> "Config":
        """Load configuration from file, falling back to defaults.

        Unknown keys are ignored with a warning. SENLAB_THREADS overrides the
        stored thread count.
        """
        config_path = cls.get_config_path()
        config = cls.default()

        if config_path.exists():
            try:
                with open(config_path, 'r') as f:
                    data = json.load(f)
                known = {f.name for f in fields(cls)}
                unknown = sorted(set(data) - known)
                if unknown:
                    logger.warning(f"Ignoring unknown config keys: {', '.join(unknown)}")
                config = cls(**{k: v for k, v in data.items() if k in known})
            except (json.JSONDecodeError, TypeError, AttributeError) as e:
                logger.warning(f"Could not load config: {e}. Using defaults.")
                config = cls.default()

        threads = os.environ.get(THREADS_ENV)
        if threads:
            try:
                config.threads = max(1, int(threads))
            except ValueError:
                logger.warning(f"Ignoring non-integer {THREADS_ENV}={threads!r}")

        return config

    @classmethod
    def default(cls) -> "Config":
        """Create default configuration."""
        return cls()

    def save(self) -> None:
        """Save configuration to file."""
        config_path = self.get_config_path()
        config_path.parent.mkdir(parents=True, exist_ok=True)

        with open(config_path, 'w') as f:
            json.dump(asdict(self), f, indent=2)

    def worker_count(self) -> int:
        """Number of worker threads for suite runs."""
        if self.threads:
            return self.threads
        return min(os.cpu_count() or 1, MAX_DEFAULT_THREADS)
