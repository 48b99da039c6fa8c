# designer/apps.py

from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class DesignerConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'designer'
    verbose_name = _('Optimisation du concepteur')
