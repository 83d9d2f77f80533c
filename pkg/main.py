#!/usr/bin/env python3

import click
from traceback import format_exc as get_trace
from typing import Optional

from logger import logging, setup_logging, verbose_option
from config import config, config_option, cmd_config
from report import write_error
from calibration import cmd_calibrate_futures, cmd_calibrate_spot, cmd_spikes
from value import cmd_simulate, cmd_value
from intrinsic import cmd_intrinsic, cmd_rolling_intrinsic
from backtest import cmd_backtest
from modelrisk import cmd_model_risk


@click.group()
@verbose_option
@config_option
@click.option('--seed-backward', type=int, default=None, help='Seed of the paths the policy is fitted on (default: seeds.backward)')
@click.option('--seed-forward', type=int, default=None, help='Seed of the paths the policy is evaluated on (default: seeds.forward)')
@click.option('--seed-risk', type=int, default=None, help='Seed of the model family draws (default: seeds.risk)')
@click.option('--out', 'output', default=None, help='Output directory (default: paths.output)')
@click.option('--log-file', default=None, help='Also write the log to this file')
def cli(
    verbose: bool = False,
    config_file: Optional[str] = None,
    seed_backward: Optional[int] = None,
    seed_forward: Optional[int] = None,
    seed_risk: Optional[int] = None,
    output: Optional[str] = None,
    log_file: Optional[str] = None,
):
    setup_logging(verbose, log_file)
    config.runtime['verbose'] = verbose
    config.runtime['seed_backward'] = seed_backward
    config.runtime['seed_forward'] = seed_forward
    config.runtime['seed_risk'] = seed_risk
    config.runtime['output'] = output
    config.try_load_file(config_file)


def main(args: Optional[list[str]] = None):
    try:
        return cli(args=args, prog_name='gasstorage', standalone_mode=False)
    except click.exceptions.Abort:
        logging.fatal('Aborted!')
        exit(1)
    except click.ClickException as ex:
        ex.show()
        exit(ex.exit_code)
    except Exception as ex:
        if config.runtime['verbose']:
            logging.fatal(get_trace())
        else:
            logging.fatal(ex)
        output_dir = config.runtime['output'] or (config.get_output_dir() if config.is_loaded() else None)
        path = write_error(output_dir, ex)
        if path:
            logging.info(f'Error record written to {path}')
        exit(1)


cli.add_command(cmd_config)
cli.add_command(cmd_spikes)
cli.add_command(cmd_calibrate_futures)
cli.add_command(cmd_calibrate_spot)
cli.add_command(cmd_simulate)
cli.add_command(cmd_value)
cli.add_command(cmd_intrinsic)
cli.add_command(cmd_rolling_intrinsic)
cli.add_command(cmd_backtest)
cli.add_command(cmd_model_risk)

if __name__ == '__main__':
    main()
