"""
Generate a random environment and write it to a file.

Usage:
    python manage.py gen_env --n 1000 --p 0.4 --seed 42 --out env.txt
"""
from core.management.base import ZRPCommand
from environment.ladder import block_census, environment_digest, generate_environment
from environment.storage import save_environment
from environment.tiles import decompose_tiles


class Command(ZRPCommand):
    help = 'Generate a randomly oriented ladder environment'
    record_kind = 'gen-env'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--n', type=int, required=True, help='Number of sites N')
        parser.add_argument('--p', type=float, required=True, help='Pair probability in [0, 1)')
        parser.add_argument('--seed', type=int, default=0, help='RNG seed')
        parser.add_argument('--out', type=str, required=True, help='Output file')

    def run(self, **options):
        env = generate_environment(options['n'], options['p'], options['seed'])
        path = save_environment(env, options['out'])
        decomp = decompose_tiles(env)
        blocks, pairs = block_census(env)

        report = {
            'n': env.n,
            'p': env.pair_prob,
            'seed': env.seed,
            'environment_digest': environment_digest(env),
            't_n': decomp.t_n,
            'kappa_n': decomp.kappa_n,
            'blocks': blocks,
            'pairs': pairs,
        }
        self.record(options, report, config={'n': env.n, 'p': env.pair_prob, 'seed': env.seed})
        self.stdout.write(
            self.style.SUCCESS(f'Wrote {path} (N={env.n}, T_N={decomp.t_n}, kappa_N={decomp.kappa_n:.6f})')
        )
