import appdirs
import click
import os
import toml
import logging
from copy import deepcopy
from datetime import date
from typing import Optional, Any, Mapping

from constants import (
    BASIS_QUADRATIC,
    MAX_VOLUME_NODES,
    MODEL2_SPREAD_FLOOR,
    REFERENCE_SPOT_MODEL1,
    SPIKE_BETA,
    SPIKE_THRESHOLD_K,
    SPIKE_WINDOW_NEG,
    SPIKE_WINDOW_POS,
    STORAGE_PRESETS,
)
from errors import ConfigError

CONFIG_DIR = appdirs.user_config_dir('gasstorage')
CACHE_DIR = appdirs.user_cache_dir('gasstorage')

CONFIG_DEFAULT_PATH = os.path.join(CONFIG_DIR, 'gasstorage.toml')

CONFIG_DEFAULTS: dict = {
    'paths': {
        'cache_dir': CACHE_DIR,
        'output': os.path.join('%cache_dir%', 'runs'),
    },
    'data': {
        'spot_csv': '',
        'curve_csv': '',
        'futures_params': '',
        'spot_params': '',
    },
    'contract': {
        # 'fast', 'slow' or 'custom' (then the explicit volumes and rates below apply)
        'preset': 'fast',
        'start_date': '2007-04-01',
        'end_date': '',
        'dt': 1,
        'v_min': STORAGE_PRESETS['fast']['v_min'],
        'v_max': STORAGE_PRESETS['fast']['v_max'],
        'a_inj': STORAGE_PRESETS['fast']['a_inj'],
        'a_with': STORAGE_PRESETS['fast']['a_with'],
        'v_start': STORAGE_PRESETS['fast']['v_start'],
        'v_end_target': STORAGE_PRESETS['fast']['v_end_target'],
        'cost_per_unit': 0.0,
    },
    'market': {
        'expiry_offset_days': 0,
        'spike_k': SPIKE_THRESHOLD_K,
        'n_maturities': 12,
        'long_horizon_years': 4.0,
    },
    'spikes': {
        'beta': SPIKE_BETA,
        'window_pos': list(SPIKE_WINDOW_POS),
        'window_neg': list(SPIKE_WINDOW_NEG),
        'fallback_pos_mean': REFERENCE_SPOT_MODEL1['spike_pos.jump_mean'],
        'fallback_pos_std': REFERENCE_SPOT_MODEL1['spike_pos.jump_std'],
        'fallback_neg_mean': REFERENCE_SPOT_MODEL1['spike_neg.jump_mean'],
        'fallback_neg_std': REFERENCE_SPOT_MODEL1['spike_neg.jump_std'],
    },
    'simulation': {
        'n_paths': 5000,
        'model_id': 2,
        'spikes': True,
        'threads': 1,
        'path_format': 'npz',
        'initial_spread': 0.0,
        'spread_floor': MODEL2_SPREAD_FLOOR,
    },
    'valuation': {
        'basis': BASIS_QUADRATIC,
        'max_nodes': MAX_VOLUME_NODES,
        'delta': '2',
    },
    'seeds': {
        'backward': 1,
        'forward': 2,
        'risk': 3,
    },
    'model_risk': {
        'n_target': 30,
        'epsilon': 0.05,
        'ks_level': 0.05,
        'attempt_factor': 50,
        'n_paths': 1000,
    },
}
CONFIG_SECTIONS = list(CONFIG_DEFAULTS.keys())

CONFIG_RUNTIME_DEFAULTS = {
    'verbose': False,
    'config_file': None,
    'output': None,
    'seed_backward': None,
    'seed_forward': None,
    'seed_risk': None,
}


def expand_path(template: str, paths: Mapping[str, str]) -> str:
    """Replace `%name%` placeholders with the other entries of the `paths` section."""
    for name, value in paths.items():
        template = template.replace(f'%{name}%', value)
    return template


def coerce_value(section: str, key: str, value: Any) -> Any:
    """Check `value` against the type of the default for `section.key`.

    Integers are accepted where a float is expected and bare TOML dates where a string is;
    everything else must match exactly.
    """
    default = CONFIG_DEFAULTS[section][key]
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, str) and isinstance(value, date):
        ok, value = True, value.isoformat()
    else:
        ok = isinstance(value, type(default))
    if not ok:
        raise ConfigError(f'{section}.{key} should be of type {type(default).__name__}, got {value!r}', {'key': f'{section}.{key}'})
    return value


def merge_configs(conf_new: Mapping[str, Any], conf_base: Optional[Mapping[str, Any]] = None) -> dict[str, dict]:
    """
    Merge the known sections and keys of `conf_new` into a copy of `conf_base`.

    Unknown entries are logged and dropped, known ones are type checked.
    `conf_base` is trusted as is.
    """
    merged: dict[str, dict] = deepcopy(dict(conf_base or {}))
    for section, entries in conf_new.items():
        if section not in CONFIG_DEFAULTS:
            logging.warning(f'Ignoring unknown config section [{section}]')
            continue
        if not isinstance(entries, Mapping):
            raise ConfigError(f'Config section [{section}] must be a table', {'key': section})
        target = merged.setdefault(section, {})
        for key, value in entries.items():
            if key not in CONFIG_DEFAULTS[section]:
                logging.warning(f'Ignoring unknown config key {section}.{key}')
                continue
            target[key] = coerce_value(section, key, deepcopy(value))
    return merged


def read_config_file(path: str, base: Mapping[str, Any] = CONFIG_DEFAULTS) -> dict[str, dict]:
    logging.debug(f'Reading config from {path}')
    return merge_configs(toml.load(path), base)


def write_config_file(path: str, conf: Mapping[str, Any]):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, 'w') as fd:
        toml.dump(conf, fd)


class ConfigLoadException(ConfigError):

    def __init__(self, reason: str, inner: Optional[Exception] = None):
        msg = f'Could not load the config: {reason}'
        if inner is not None:
            msg += f' ({inner})'
        super().__init__(msg)
        self.inner = inner


class ConfigStateHolder:
    """
    Holds the persisted config (`file`) next to the per-invocation settings (`runtime`).

    The CLI keeps one module level instance; tests build their own.
    """

    class LoadState:

        def __init__(self):
            self.load_finished = False
            self.exception: Optional[Exception] = None

    def __init__(self, runtime_conf: Mapping[str, Any] = {}, file_conf_path: Optional[str] = None, file_conf_base: Mapping[str, Any] = CONFIG_DEFAULTS):
        self.file_state = ConfigStateHolder.LoadState()
        self.runtime: dict[str, Any] = {**CONFIG_RUNTIME_DEFAULTS, **runtime_conf}
        self.file: dict[str, dict] = deepcopy(dict(file_conf_base))
        if file_conf_path:
            self.try_load_file(file_conf_path)

    def try_load_file(self, config_file: Optional[str] = None, base: Mapping[str, Any] = CONFIG_DEFAULTS):
        """
        Load `config_file`, or the per-user default file when none is given.
        Failures are stored and only raised by `enforce_config_loaded()`;
        a missing default file silently leaves the defaults in place.
        """
        path = config_file or CONFIG_DEFAULT_PATH
        self.runtime['config_file'] = path
        self.file_state = ConfigStateHolder.LoadState()
        try:
            self.file = read_config_file(path, base)
        except FileNotFoundError as ex:
            self.file = deepcopy(dict(base))
            if config_file is not None:
                self.file_state.exception = ConfigLoadException(f'{path} does not exist, create it with `gasstorage config init`', ex)
        except Exception as ex:
            self.file_state.exception = ex
        self.file_state.load_finished = True

    def is_loaded(self) -> bool:
        return self.file_state.load_finished and self.file_state.exception is None

    def enforce_config_loaded(self):
        if not self.file_state.load_finished:
            raise ConfigLoadException('no config file was read yet')
        if self.file_state.exception is not None:
            raise self.file_state.exception

    def get_path(self, name: str) -> str:
        return expand_path(self.file['paths'][name], self.file['paths'])

    def get_output_dir(self) -> str:
        return self.runtime['output'] or self.get_path('output')

    def get_seed(self, phase: str) -> int:
        """Seed of the `backward`, `forward` or `risk` phase; command line overrides win."""
        override = self.runtime.get(f'seed_{phase}')
        return int(self.file['seeds'][phase] if override is None else override)

    def update(self, fragment: Mapping[str, Any]) -> bool:
        """Merge `fragment` into the file config and report whether anything changed."""
        merged = merge_configs(fragment, self.file)
        changed = merged != self.file
        self.file = merged
        return changed

    def write(self, path: Optional[str] = None):
        path = path or self.runtime['config_file'] or CONFIG_DEFAULT_PATH
        write_config_file(path, self.file)
        logging.info(f'Config written to {path}')


def comma_str_to_list(s: Optional[str], default: Any = None, item_type: type = str) -> Any:
    if not s:
        return default
    return [item_type(part.strip()) for part in s.split(',') if part.strip()]


def config_dot_name_get(name: str, conf: Mapping[str, Any]) -> Any:
    """Look up a dotted name like `seeds.risk` in a nested config dict."""
    node: Any = conf
    walked: list[str] = []
    for part in name.split('.'):
        walked.append(part)
        if not isinstance(node, Mapping) or part not in node:
            raise ConfigError(f'Unknown config key {".".join(walked)}', {'key': name})
        node = node[part]
    return node


def config_dot_name_set(name: str, value: Any, conf: dict[str, Any]):
    *parents, leaf = name.split('.')
    target = config_dot_name_get('.'.join(parents), conf) if parents else conf
    if not isinstance(target, dict) or leaf not in target:
        raise ConfigError(f'Unknown config key {name}', {'key': name})
    target[leaf] = value


def convert_config_value(key: str, raw: str) -> Any:
    """Parse a command line string into the type of the default for `key`."""
    default = config_dot_name_get(key, CONFIG_DEFAULTS)
    if isinstance(default, list):
        return comma_str_to_list(raw, default=[], item_type=type(default[0]) if default else str)
    return click.types.convert_type(type(default))(raw)


def ask_value(key: str, current: Any) -> Any:
    """Prompt for `key`, showing `current` as the default answer."""
    label = click.style(key, bold=True)
    if isinstance(current, list):
        answer = click.prompt(label, default=','.join(str(v) for v in current), show_default=True)
        return convert_config_value(key, answer)
    return click.prompt(label, default=current, type=type(current), show_default=True)


def confirm_save() -> bool:
    return click.confirm(f'Save to {config.runtime["config_file"]}?', default=True)


config = ConfigStateHolder()

config_option = click.option(
    '-C',
    '--config',
    'config_file',
    help='Path to the config file (default: the per-user gasstorage.toml)',
)

non_interactive_option = click.option('-N', '--non-interactive', is_flag=True, help='Do not prompt')
noop_option = click.option('-n', '--noop', is_flag=True, help='Only show the result, write nothing')


@click.group(name='config')
def cmd_config():
    """Inspect and edit the config file"""


@cmd_config.command(name='init')
@non_interactive_option
@noop_option
@click.option('-s', '--sections', multiple=True, type=click.Choice(CONFIG_SECTIONS), default=CONFIG_SECTIONS, show_choices=True)
def cmd_config_init(sections: list[str], non_interactive: bool, noop: bool):
    """Write a config file, prompting for every entry of the chosen sections"""
    if not non_interactive:
        answers = {section: {key: ask_value(f'{section}.{key}', value) for key, value in config.file[section].items()} for section in sections}
        config.update(answers)
    if noop:
        click.echo(toml.dumps(config.file))
        return
    if non_interactive or confirm_save():
        config.write()


@cmd_config.command(name='set')
@non_interactive_option
@noop_option
@click.argument('assignments', nargs=-1)
def cmd_config_set(assignments: list[str], non_interactive: bool, noop: bool):
    """
    Set entries given as `key=value`, e.g. `simulation.n_paths=2000`.
    A bare key prompts for its value unless -N is passed.
    """
    changes: dict[str, dict] = {}
    for item in assignments:
        key, sep, raw = item.partition('=')
        if sep:
            value = convert_config_value(key, raw)
        elif non_interactive:
            raise ConfigError(f'Expected key=value, got "{item}"', {'key': key})
        else:
            value = ask_value(key, config_dot_name_get(key, config.file))
        section, _, name = key.partition('.')
        changes.setdefault(section, {})[name] = value
        click.echo(f'{key} = {value}')
    if not config.update(changes):
        logging.info('Nothing changed')
    if noop or not (non_interactive or confirm_save()):
        return
    config.write()


@cmd_config.command(name='get')
@click.argument('keys', nargs=-1)
def cmd_config_get(keys: list[str]):
    """Print entries given as dotted keys, e.g. `seeds.backward`"""
    for key in keys:
        value = config_dot_name_get(key, config.file)
        click.echo(value if len(keys) == 1 else f'{key} = {value}')
