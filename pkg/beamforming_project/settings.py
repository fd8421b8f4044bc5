"""
Django settings for beamforming_project project.

Solver tunables live in the BEAMFORMING dict at the bottom of this file and
can be overridden through environment variables (or a .env file).
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables
load_dotenv()

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('SECRET_KEY', 'django-insecure-maxmin-beam-local-development-key')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.getenv('DEBUG', 'True').lower() == 'true'

ALLOWED_HOSTS = os.getenv('ALLOWED_HOSTS', 'localhost,127.0.0.1,testserver').split(',')

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',

    # Beamforming apps
    'problem',
    'discrete',
    'continuous',
    'baselines',
    'harness',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.middleware.common.CommonMiddleware',
]

ROOT_URLCONF = 'beamforming_project.urls'

TEMPLATES = []

WSGI_APPLICATION = 'beamforming_project.wsgi.application'

# Nothing is persisted in the database; results go to flat files.
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# REST Framework configuration
REST_FRAMEWORK = {
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.AllowAny',
    ],
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'UNAUTHENTICATED_USER': None,
}

# Worker cap shared by Celery and the sweep harness (0 = auto)
MAXMIN_BEAM_THREADS = int(os.getenv('MAXMIN_BEAM_THREADS', '0'))

# Celery Configuration
CELERY_BROKER_URL = os.getenv('CELERY_BROKER_URL', 'memory://')
CELERY_RESULT_BACKEND = os.getenv('CELERY_RESULT_BACKEND', 'cache+memory://')
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TIMEZONE = TIME_ZONE
CELERY_ENABLE_UTC = True
# Without a real broker, sweeps run in-process.
CELERY_TASK_ALWAYS_EAGER = os.getenv(
    'CELERY_TASK_ALWAYS_EAGER',
    str(CELERY_BROKER_URL.startswith('memory://')),
).lower() == 'true'
CELERY_TASK_EAGER_PROPAGATES = True
if MAXMIN_BEAM_THREADS > 0:
    CELERY_WORKER_CONCURRENCY = MAXMIN_BEAM_THREADS

# Logging configuration
LOG_DIR = Path(os.getenv('BEAMFORMING_LOG_DIR', BASE_DIR / 'logs'))
LOG_DIR.mkdir(parents=True, exist_ok=True)

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'standard': {
            'format': '%(asctime)s %(levelname)s %(name)s %(module)s: %(message)s',
        },
    },
    'handlers': {
        'file': {
            'level': 'INFO',
            'class': 'logging.FileHandler',
            'filename': LOG_DIR / 'beamforming.log',
            'formatter': 'standard',
        },
        'console': {
            'level': os.getenv('BEAMFORMING_CONSOLE_LOG_LEVEL', 'WARNING'),
            'class': 'logging.StreamHandler',
            'formatter': 'standard',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file', 'console'],
            'level': 'INFO',
            'propagate': True,
        },
        'beamforming': {
            'handlers': ['file', 'console'],
            'level': os.getenv('BEAMFORMING_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}

# Solver configuration
BEAMFORMING = {
    'DEFAULT_POWER': float(os.getenv('BEAMFORMING_POWER', '10.0')),
    'NOISE_POWER': float(os.getenv('BEAMFORMING_NOISE_POWER', '1.0')),
    'EPSILON': float(os.getenv('BEAMFORMING_EPSILON', '1e-3')),
    'SDP_TOL': float(os.getenv('BEAMFORMING_SDP_TOL', '1e-6')),
    'SDP_MAX_OUTER': int(os.getenv('BEAMFORMING_SDP_MAX_OUTER', '40')),
    'MARY_NODE_CAP': int(os.getenv('BEAMFORMING_MARY_NODE_CAP', str(10**7))),
    'SBB_NODE_BUDGET': int(os.getenv('BEAMFORMING_SBB_NODE_BUDGET', str(10**5))),
    'SBB_WARM_STARTS': int(os.getenv('BEAMFORMING_SBB_WARM_STARTS', '8')),
    'AO_MAX_SWEEPS': int(os.getenv('BEAMFORMING_AO_MAX_SWEEPS', '100')),
    'AO_REL_TOL': float(os.getenv('BEAMFORMING_AO_REL_TOL', '1e-8')),
    'AO_RESTARTS': int(os.getenv('BEAMFORMING_AO_RESTARTS', '8')),
    'AO_GRID_POINTS': int(os.getenv('BEAMFORMING_AO_GRID_POINTS', '64')),
    'ORACLE_SPACE_LIMIT': int(os.getenv('BEAMFORMING_ORACLE_SPACE_LIMIT', str(2**24))),
    'WORKERS': MAXMIN_BEAM_THREADS,
}

# Security settings
if not DEBUG:
    SECURE_CONTENT_TYPE_NOSNIFF = True
    SECURE_SSL_REDIRECT = os.getenv('SECURE_SSL_REDIRECT', 'False').lower() == 'true'
