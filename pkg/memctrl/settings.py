"""
Settings for the memctrl package.

Numerical tolerances, resolution rules and logging configuration shared by
the core modules and the command-line front end. Process-level knobs are read
from the environment (or a .env file) with python-decouple.
"""

import logging
import logging.config
from pathlib import Path
from typing import Optional

from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

VERSION = '1.0.0'


# =============================================================================
# ENVIRONMENT
# =============================================================================

# Upper bound on joblib workers for per-mode maps
THREADS = config('MEMCTRL_THREADS', default=1, cast=int)

LOG_LEVEL = config('MEMCTRL_LOG_LEVEL', default='INFO')


# =============================================================================
# NUMERICAL TOLERANCES
# =============================================================================

# Eigenvalues closer than this to zero are rejected
DEGENERATE_TOL = 1e-10

# Largest admissible h*|lambda_n| for the modal solvers
RESOLUTION_LIMIT = 0.5

# Projection idempotency / adjointness and range conditions
PROJECTION_TOL = 1e-10

# Vanishing-moment check for generators handed to the lifts
CONSTRAINT_TOL = 1e-6

# Moment residual target
RESIDUAL_TOL = 1e-6

# Gram eigenvalues below GRAM_DEFECT_TOL * lambda_max count as defect
GRAM_DEFECT_TOL = 1e-8

# Condition estimate above which solve_min_norm refuses
CONDITION_LIMIT = 1e12

# Relative reach error accepted by steer
REACH_TOL = 1e-3

# Log-log slope thresholds for tail verdicts
SUMMABLE_SLOPE = 0.05
DIVERGENT_SLOPE = 0.5

# Relative size below which the obstruction functional counts as zero
OBSTRUCTION_TOL = 1e-8

# Picard defaults
PICARD_MAX_ITER = 200
PICARD_TOL = 1e-12

# Automatic grid: m = max(AUTO_GRID_FLOOR, next_pow2(AUTO_GRID_FACTOR * T * |lambda_N|))
AUTO_GRID_FLOOR = 512
AUTO_GRID_FACTOR = 4.0

# Smallest admissible number of time steps
MIN_GRID_STEPS = 16

# Interval critical time for Gamma = {0}
CRITICAL_TIME = 2.0

TOLERANCES = {
    'degenerate': DEGENERATE_TOL,
    'resolution': RESOLUTION_LIMIT,
    'projection': PROJECTION_TOL,
    'constraint': CONSTRAINT_TOL,
    'residual': RESIDUAL_TOL,
    'gram_defect': GRAM_DEFECT_TOL,
    'condition': CONDITION_LIMIT,
    'reach': REACH_TOL,
    'summable_slope': SUMMABLE_SLOPE,
    'divergent_slope': DIVERGENT_SLOPE,
    'obstruction': OBSTRUCTION_TOL,
}


# =============================================================================
# LOGGING
# =============================================================================

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'colored': {
            '()': 'coloredlogs.ColoredFormatter',
            'fmt': '%(asctime)s %(name)s %(levelname)s %(message)s',
        },
        'plain': {
            'format': '%(asctime)s %(name)s %(levelname)s %(message)s',
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'colored',
        },
    },
    'loggers': {
        'memctrl': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}


def configure_logging(level: Optional[str] = None, log_file: Optional[Path] = None) -> None:
    """Install LOGGING, optionally adding a file handler next to the results."""
    logging_config = {
        **LOGGING,
        'handlers': dict(LOGGING['handlers']),
        'loggers': {name: dict(cfg) for name, cfg in LOGGING['loggers'].items()},
    }

    if log_file is not None:
        logging_config['handlers']['file'] = {
            'level': 'INFO',
            'class': 'logging.FileHandler',
            'filename': str(log_file),
            'formatter': 'plain',
        }
        logging_config['loggers']['memctrl']['handlers'] = ['console', 'file']

    if level:
        logging_config['loggers']['memctrl']['level'] = level.upper()

    logging.config.dictConfig(logging_config)
