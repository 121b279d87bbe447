# Generated by Django 5.2.7 on 2026-10-19 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='EnvironmentRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('figures', models.TextField(help_text="Figure sequence as a string of '1', '2' and '3' characters", verbose_name='Figures')),
                ('n', models.PositiveIntegerField(help_text='Number of sites N of the torus', verbose_name='Site count')),
                ('pair_prob', models.FloatField(blank=True, help_text='Generation parameter p; empty for hand-built environments', null=True, verbose_name='Pair probability')),
                ('seed', models.BigIntegerField(default=0, help_text='RNG seed the environment was generated with', verbose_name='Seed')),
                ('digest', models.CharField(editable=False, help_text='sha256 of the figure string, used for provenance', max_length=64, unique=True, verbose_name='Digest')),
                ('tile_count', models.PositiveIntegerField(editable=False, help_text='Number of tiles T_N', verbose_name='Tile count')),
                ('kappa_n', models.FloatField(editable=False, help_text='Sites per tile N / T_N', verbose_name='kappa_N')),
                ('created_at', models.DateTimeField(auto_now_add=True, help_text='The date and time when the environment was stored', verbose_name='Created At')),
            ],
            options={
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['digest'], name='environment_digest_5c1a2e_idx'), models.Index(fields=['-created_at'], name='environment_created_9d3f41_idx')],
            },
        ),
    ]
