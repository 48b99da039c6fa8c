# airdrop_lab/settings.py
# Configuration principale du laboratoire airdrop_lab (jeux d'airdrop et dynamiques logit)

import os
from pathlib import Path

from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Aucun service web n'est exposé : la clé ne sert qu'au démarrage de Django
SECRET_KEY = config('AIRDROP_LAB_SECRET_KEY', default='django-insecure-airdrop-lab-local-key')

DEBUG = config('AIRDROP_LAB_DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

DJANGO_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
]

THIRD_PARTY_APPS = [
    'rest_framework',
]

LOCAL_APPS = [
    'common',
    'games',
    'equilibria',
    'chains',
    'dynamics',
    'designer',
    'experiments.apps.ExperimentsConfig',
]

INSTALLED_APPS = DJANGO_APPS + THIRD_PARTY_APPS + LOCAL_APPS

# Database
# Registre local des exécutions (ExperimentRun)

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': config('AIRDROP_LAB_DB_PATH', default=os.path.join(BASE_DIR, 'airdrop_lab.sqlite3')),
    }
}

# Internationalization

LANGUAGE_CODE = 'fr-fr'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Configuration du laboratoire
AIRDROP_LAB = {
    # Nombre de processus pour les essais Monte-Carlo (0 = nombre de CPU)
    'THREADS': config('AIRDROP_LAB_THREADS', default=1, cast=int),
    # Au-delà, l'énumération brute des profils est refusée
    'PROFILE_CAP': config('AIRDROP_LAB_PROFILE_CAP', default=2_000_000, cast=int),
    # Tolérance d'égalité sur le potentiel (POTMAX)
    'POTENTIAL_TOLERANCE': 1e-9,
    # Taille des blocs de tirages uniformes par essai
    'DRAW_CHUNK': 4096,
    # Plafond d'itérations pour le temps de mélange exact
    'MIXING_MAX_STEPS': 1_000_000,
    'GOLDEN_TOLERANCE': 1e-8,
    'PROFIT_GRID_POINTS': 10_000,
    'DEFAULT_BETA': 1.13,
    # Plafond de pas par essai avant censure
    'HITTING_CAP': 10_000_000,
    # Marge au-dessus de ρ_c pour le régime du concepteur
    'EPSILON': 1e-3,
}

LOG_LEVEL = config('AIRDROP_LAB_LOG_LEVEL', default='INFO')

# Configuration de logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {asctime} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'file': {
            'level': 'WARNING',
            'class': 'logging.FileHandler',
            'filename': os.path.join(BASE_DIR, 'logs/airdrop_lab.log'),
            'formatter': 'simple',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console', 'file'],
            'level': 'WARNING',
            'propagate': True,
        },
        'airdrop_lab': {
            'handlers': ['console', 'file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}

# Assurez-vous que le dossier logs existe
os.makedirs(os.path.join(BASE_DIR, 'logs'), exist_ok=True)
