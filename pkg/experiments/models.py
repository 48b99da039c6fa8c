# experiments/models.py
# Registre des exécutions de la ligne de commande

import uuid

from django.db import models
from django.utils import timezone
from django.utils.translation import gettext_lazy as _


class ExperimentRun(models.Model):
    """Trace d'une exécution : type d'expérience, empreinte de la configuration, sorties."""

    KIND_CHOICES = (
        ('equilibria', _('Équilibres')),
        ('stationary', _('Loi stationnaire')),
        ('simulate', _('Simulation')),
        ('hitting', _('Temps d\'atteinte')),
        ('phase', _('Transition de phase')),
        ('profit', _('Profit du concepteur')),
        ('times', _('Temps de mélange et d\'atteinte')),
    )

    STATUS_CHOICES = (
        ('running', _('En cours')),
        ('completed', _('Terminée')),
        ('failed', _('Échouée')),
    )

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    kind = models.CharField(_('type d\'expérience'), max_length=20, choices=KIND_CHOICES)
    config_hash = models.CharField(_('empreinte de la configuration'), max_length=64, db_index=True)
    seed = models.CharField(_('graine'), max_length=32, blank=True)
    reproducible = models.BooleanField(_('mode reproductible'), default=False)
    status = models.CharField(_('statut'), max_length=20, choices=STATUS_CHOICES, default='running')
    output_dir = models.CharField(_('dossier de sortie'), max_length=500, blank=True)
    outputs = models.JSONField(_('fichiers produits'), default=list, blank=True)
    summary = models.JSONField(_('résumé'), default=dict, blank=True)
    error_message = models.TextField(_('message d\'erreur'), blank=True)
    created_at = models.DateTimeField(_('date de création'), auto_now_add=True)
    finished_at = models.DateTimeField(_('date de fin'), null=True, blank=True)

    class Meta:
        verbose_name = _('exécution')
        verbose_name_plural = _('exécutions')
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.get_kind_display()} - {self.config_hash[:12]} - {self.get_status_display()}"

    def mark_as_completed(self, outputs, summary):
        """Marque l'exécution comme terminée."""
        self.status = 'completed'
        self.outputs = outputs
        self.summary = summary
        self.finished_at = timezone.now()
        self.save(update_fields=['status', 'outputs', 'summary', 'finished_at'])

    def mark_as_failed(self, message):
        """Marque l'exécution comme échouée."""
        self.status = 'failed'
        self.error_message = message
        self.finished_at = timezone.now()
        self.save(update_fields=['status', 'error_message', 'finished_at'])
