"""
Runtime settings for the hierarchical data-assimilation toolkit.

This module centralizes process-level knobs (logging, worker count, dense
factorization limits, output location). Experiment parameters live in the
JSON run configuration instead, see ``experiment.py``.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()


class Settings:
    """Central runtime configuration read from the environment."""

    ROOT_DIR: Path = Path(__file__).resolve().parent.parent.parent

    CONFIGS_DIR: Path = ROOT_DIR / "configs"
    OUTPUT_ROOT: Path = Path(os.getenv("HDA_OUTPUT_ROOT", str(ROOT_DIR / "runs")))

    # ----------------------------
    # Parallel forward evaluation
    # ----------------------------
    # Results never depend on this value; it only sets the joblib pool size.
    WORKERS: int = int(os.getenv("HDA_WORKERS", "1"))
    JOBLIB_BACKEND: str = os.getenv("HDA_JOBLIB_BACKEND", "loky")

    # ----------------------------
    # Geostatistics
    # ----------------------------
    # Dense Cholesky on n_cells x n_cells; 4096 cells is ~128 MB of float64.
    FIELD_CELL_CAP: int = int(os.getenv("HDA_FIELD_CELL_CAP", "4096"))
    FACTOR_CACHE_ITEMS: int = int(os.getenv("HDA_FACTOR_CACHE_ITEMS", "8"))

    # ----------------------------
    # Artifacts
    # ----------------------------
    CSV_FLOAT_FORMAT: str = "%.17g"
    MANIFEST_NAME: str = "manifest.json"
    LEDGER_NAME: str = "ledger.json"

    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    LOG_FORMAT: str = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    LOG_FILE: str = os.getenv("LOG_FILE", "")

    @classmethod
    def validate(cls) -> bool:
        """
        Validate runtime settings.

        Returns:
            bool: True if every knob is in its legal range, False otherwise.
        """
        if cls.WORKERS < 1:
            return False
        if cls.FIELD_CELL_CAP < 1 or cls.FACTOR_CACHE_ITEMS < 1:
            return False
        return True

    @classmethod
    def get_config_path(cls, name: str) -> Path:
        """
        Resolve a bundled experiment configuration by file name.

        Args:
            name: File name inside ``configs/`` (with or without ``.json``).

        Returns:
            Path: Absolute path to the configuration file.
        """
        if not name.endswith(".json"):
            name = f"{name}.json"
        return cls.CONFIGS_DIR / name


settings = Settings()
