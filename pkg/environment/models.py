from django.db import models

from .ladder import environment_digest, environment_from_string
from .tiles import decompose_tiles


class EnvironmentRecord(models.Model):
    """
    A stored quenched environment.
    The figure string is the source of truth; T_N and kappa_N are derived
    from it on save so listings do not need to re-decompose.
    """
    figures = models.TextField(
        verbose_name="Figures",
        help_text="Figure sequence as a string of '1', '2' and '3' characters"
    )
    n = models.PositiveIntegerField(
        verbose_name="Site count",
        help_text="Number of sites N of the torus"
    )
    pair_prob = models.FloatField(
        null=True,
        blank=True,
        verbose_name="Pair probability",
        help_text="Generation parameter p; empty for hand-built environments"
    )
    seed = models.BigIntegerField(
        default=0,
        verbose_name="Seed",
        help_text="RNG seed the environment was generated with"
    )
    digest = models.CharField(
        max_length=64,
        unique=True,
        editable=False,
        verbose_name="Digest",
        help_text="sha256 of the figure string, used for provenance"
    )
    tile_count = models.PositiveIntegerField(
        editable=False,
        verbose_name="Tile count",
        help_text="Number of tiles T_N"
    )
    kappa_n = models.FloatField(
        editable=False,
        verbose_name="kappa_N",
        help_text="Sites per tile N / T_N"
    )
    created_at = models.DateTimeField(
        auto_now_add=True,
        verbose_name="Created At",
        help_text="The date and time when the environment was stored"
    )

    class Meta:
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['digest']),
            models.Index(fields=['-created_at']),
        ]

    @classmethod
    def from_environment(cls, env):
        """Build (unsaved) or fetch the record for an environment."""
        digest = environment_digest(env)
        existing = cls.objects.filter(digest=digest).first()
        if existing:
            return existing
        pair_prob = None if env.pair_prob != env.pair_prob else env.pair_prob
        return cls(figures=env.to_string(), n=env.n, pair_prob=pair_prob, seed=env.seed)

    def to_environment(self):
        pair_prob = float('nan') if self.pair_prob is None else self.pair_prob
        return environment_from_string(self.figures, seed=self.seed, pair_prob=pair_prob)

    def save(self, *args, **kwargs):
        env = self.to_environment()
        decomp = decompose_tiles(env)
        self.n = env.n
        self.digest = environment_digest(env)
        self.tile_count = decomp.t_n
        self.kappa_n = decomp.kappa_n
        super().save(*args, **kwargs)

    def __str__(self):
        return f"N={self.n} kappa_N={self.kappa_n:.4f} ({self.digest[:10]})"
