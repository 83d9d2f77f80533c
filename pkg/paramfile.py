"""
Flat `name = value` parameter files.

The files are valid TOML: nested blocks are written as dotted keys
(`spike_pos.beta = 300.0`), one per line, so they stay greppable and diffable.
"""
import logging
import os
from typing import Any, Mapping

import toml

from errors import ParseError


def flatten(nested: Mapping[str, Any], prefix: str = '') -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for key, value in nested.items():
        name = f'{prefix}{key}'
        if isinstance(value, Mapping):
            flat |= flatten(value, prefix=name + '.')
        else:
            flat[name] = value
    return flat


def dump_flat(values: Mapping[str, Any], header: str = '') -> str:
    encoder = toml.TomlEncoder()
    lines = [f'# {line}' for line in header.splitlines()]
    for key, value in flatten(values).items():
        if value is None:
            continue
        lines.append(f'{key} = {encoder.dump_value(value)}')
    return '\n'.join(lines) + '\n'


def write_flat(path: str, values: Mapping[str, Any], header: str = ''):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, 'w') as f:
        f.write(dump_flat(values, header=header))
    logging.debug(f'Wrote parameter file {path}')


def parse_flat(text: str, path: str = '') -> dict[str, Any]:
    try:
        return flatten(toml.loads(text))
    except toml.TomlDecodeError as ex:
        raise ParseError(ex.msg, line=ex.lineno, path=path)


def read_flat(path: str) -> dict[str, Any]:
    logging.debug(f'Reading parameter file {path}')
    with open(path, 'r') as f:
        return parse_flat(f.read(), path=path)
