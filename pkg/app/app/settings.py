"""
Django settings for the time-reversal link simulation project.

The project has no database and no HTTP surface. Django provides the
settings layer, the management commands that make up the CLI and the
test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Required by Django even though nothing is signed
SECRET_KEY = os.environ.get('SECRET_KEY', 'changethis')

DEBUG = bool(int(os.environ.get('DEBUG', 0)))

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'core',
    'dspcore',
    'chanmodel',
    'prefilters',
    'linksim',
    'metrics',
    'harness',
    'rest_framework',
]

# Simulation results live on disk (CSV, JSON, MANIFEST), not in a database
DATABASES = {}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


def _env_float_tuple(name, default):
    """Read a comma-separated float tuple from the environment"""
    raw = os.environ.get(name)
    if not raw:
        return default
    return tuple(float(part) for part in raw.split(','))


# Simulation defaults. Every value may be overridden per experiment in the
# YAML config; these are what the library falls back to.
SIMULATION = {
    # Channel sampling period in nanoseconds
    'SAMPLE_PERIOD_NS': float(os.environ.get('SIM_SAMPLE_PERIOD_NS', 0.5)),
    # Number of CIR taps L
    'NUM_TAPS': int(os.environ.get('SIM_NUM_TAPS', 60)),
    # Total average channel power (Gamma)
    'GAMMA': float(os.environ.get('SIM_GAMMA', 1.0)),
    'CARRIER_FREQUENCY_HZ': float(
        os.environ.get('SIM_CARRIER_FREQUENCY_HZ', 60e9)
    ),
    'ELEMENT_SPACING_M': float(os.environ.get('SIM_ELEMENT_SPACING_M', 0.02)),
    # Diffuse subrays per tap and the size of the scatterer producing them
    'DIFFUSE_SUBRAYS': int(os.environ.get('SIM_DIFFUSE_SUBRAYS', 8)),
    'SCATTERER_RADIUS_M': float(
        os.environ.get('SIM_SCATTERER_RADIUS_M', 0.1)
    ),
    # Scattering clusters per realization, shared by all users, and the
    # angular spread of the scatterers around each cluster direction
    'NUM_CLUSTERS': int(os.environ.get('SIM_NUM_CLUSTERS', 4)),
    'CLUSTER_SPREAD_DEG': float(
        os.environ.get('SIM_CLUSTER_SPREAD_DEG', 2.0)
    ),
    # Room (x, y, z) in metres; the array hangs from the ceiling centre
    'ROOM_M': _env_float_tuple('SIM_ROOM', (5.0, 5.0, 3.0)),
    'WORKERS': int(os.environ.get('SIM_WORKERS', 1)),
    'OUTPUT_DIR': Path(os.environ.get('SIM_OUTPUT_DIR', BASE_DIR / 'results')),
}


# Logging
# https://docs.djangoproject.com/en/4.2/topics/logging/

LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        app_name: {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        }
        for app_name in (
            'core',
            'dspcore',
            'chanmodel',
            'prefilters',
            'linksim',
            'metrics',
            'harness',
        )
    },
}

REST_FRAMEWORK = {
    # Serializers are used for config validation only
    'UNAUTHENTICATED_USER': None,
}
