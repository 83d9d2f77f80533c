import json
import logging
import os
from datetime import datetime
from typing import Any, Optional

import numpy as np
import pandas as pd

from errors import error_record
from utils import config_hash

FLOAT_FORMAT = '%.10g'
ERROR_FILE = 'error.json'


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


def dump_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + '\n'


def write_json(path: str, obj: Any):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w') as fd:
        fd.write(dump_json(obj))
    logging.info(f'Wrote {path}')


def write_csv(path: str, frame: pd.DataFrame):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logging.info(f'Wrote {len(frame)} rows to {path}')


def write_manifest(output_dir: str, command: str, settings: dict[str, Any], files: list[str], parameter_files: Optional[dict[str, str]] = None) -> str:
    """
    Everything needed to replay a run: the command, its settings and their hash, the parameter files used
    and the files written. Only the `created` entry differs between identical runs.
    """
    manifest = {
        'command': command,
        'config_hash': config_hash(settings),
        'settings': settings,
        'parameter_files': parameter_files or {},
        'outputs': sorted(os.path.basename(f) for f in files),
        'created': datetime.now().isoformat(timespec='seconds'),
    }
    path = os.path.join(output_dir, f'{command}.manifest.json')
    write_json(path, manifest)
    return path


def write_error(output_dir: Optional[str], ex: BaseException) -> Optional[str]:
    """machine-readable record of a failed run; never raises"""
    if not output_dir:
        return None
    path = os.path.join(output_dir, ERROR_FILE)
    try:
        os.makedirs(output_dir, exist_ok=True)
        with open(path, 'w') as fd:
            fd.write(dump_json(error_record(ex)))
    except OSError as write_ex:
        logging.warning(f'Could not write error record to {path}: {write_ex}')
        return None
    return path
