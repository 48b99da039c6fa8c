# Generated by Django 5.2.1 on 2026-10-18 09:12

from django.db import migrations, models
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('kind', models.CharField(choices=[('equilibria', 'Équilibres'), ('stationary', 'Loi stationnaire'), ('simulate', 'Simulation'), ('hitting', "Temps d'atteinte"), ('phase', 'Transition de phase'), ('profit', 'Profit du concepteur'), ('times', "Temps de mélange et d'atteinte")], max_length=20, verbose_name="type d'expérience")),
                ('config_hash', models.CharField(db_index=True, max_length=64, verbose_name='empreinte de la configuration')),
                ('seed', models.CharField(blank=True, max_length=32, verbose_name='graine')),
                ('reproducible', models.BooleanField(default=False, verbose_name='mode reproductible')),
                ('status', models.CharField(choices=[('running', 'En cours'), ('completed', 'Terminée'), ('failed', 'Échouée')], default='running', max_length=20, verbose_name='statut')),
                ('output_dir', models.CharField(blank=True, max_length=500, verbose_name='dossier de sortie')),
                ('outputs', models.JSONField(blank=True, default=list, verbose_name='fichiers produits')),
                ('summary', models.JSONField(blank=True, default=dict, verbose_name='résumé')),
                ('error_message', models.TextField(blank=True, verbose_name="message d'erreur")),
                ('created_at', models.DateTimeField(auto_now_add=True, verbose_name='date de création')),
                ('finished_at', models.DateTimeField(blank=True, null=True, verbose_name='date de fin')),
            ],
            options={
                'verbose_name': 'exécution',
                'verbose_name_plural': 'exécutions',
                'ordering': ['-created_at'],
            },
        ),
    ]
