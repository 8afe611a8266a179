# File: memctrl/utils/exporters.py

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional
import json
import logging

import jsonschema
import numpy as np
import pandas as pd
import scipy

from .. import settings
from .schemas import RESULTS_SCHEMA

logger = logging.getLogger(__name__)


@dataclass
class ExperimentResult:
    """What an experiment runner hands back to the CLI"""
    experiment: str
    passed: bool
    summary: Dict[str, Any]
    verdicts: Dict[str, Any]
    frames: Dict[str, pd.DataFrame] = field(default_factory=dict)
    message: Optional[str] = None


def to_jsonable(value: Any) -> Any:
    """Recursively convert numpy scalars/arrays and complex numbers into JSON types"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': float(value.real), 'im': float(value.imag)}
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else str(value)
    if isinstance(value, Path):
        return str(value)
    return value


class ResultWriter:
    """
    Writes one experiment's artifacts into its output directory.

    CSV files use ',' separators, '.' decimals and a header row.
    """

    def __init__(self, output_dir: Path):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.artifacts: List[str] = []

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        path = self.output_dir / f"{name}.csv"
        frame.to_csv(path, index=False, sep=',', float_format='%.12g')
        self.artifacts.append(path.name)
        logger.info(f"Wrote {path} ({len(frame)} rows)")
        return path

    def write_results(self, result: ExperimentResult, parameters: Dict[str, Any]) -> Path:
        payload = {
            'experiment': result.experiment,
            'passed': result.passed,
            'summary': result.summary,
            'parameters': parameters,
            'versions': versions(),
            'tolerances': settings.TOLERANCES,
            'verdicts': result.verdicts,
            'artifacts': sorted(self.artifacts),
            'timestamp': datetime.now(timezone.utc).isoformat(),
        }
        payload = to_jsonable(payload)

        try:
            jsonschema.validate(payload, RESULTS_SCHEMA)
        except jsonschema.ValidationError as exc:
            logger.error(f"results.json failed schema validation: {exc.message}")
            raise

        path = self.output_dir / 'results.json'
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n', encoding='utf-8')
        logger.info(f"Wrote {path}")
        return path


def versions() -> Dict[str, str]:
    return {
        'memctrl': settings.VERSION,
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'pandas': pd.__version__,
    }
