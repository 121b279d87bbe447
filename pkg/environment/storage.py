"""
Environment files: one line of '1'/'2'/'3' characters, newline-terminated.
"""
from pathlib import Path

from core import constants
from core.exceptions import EnvironmentValidationError

from .ladder import environment_from_string, require_valid


def save_environment(env, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(env.to_string() + '\n', encoding='ascii')
    return path


def load_environment(path, seed=0, pair_prob=float('nan')):
    try:
        text = Path(path).read_text(encoding='ascii')
    except (OSError, UnicodeDecodeError) as exc:
        raise EnvironmentValidationError(constants.ENVIRONMENT_UNREADABLE.format(path=path, reason=exc)) from exc
    # the file carries no generation metadata, so the loader re-validates
    return require_valid(environment_from_string(text, seed=seed, pair_prob=pair_prob))
