# equilibria/apps.py

from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class EquilibriaConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'equilibria'
    verbose_name = _('Équilibres')
