"""
Tests for run-config parsing, the report writer and the command-line front end
"""
import csv
import json
import os

import pytest

from config.run_config import load_run_config, parse_run_config
from config.solver_config import EXIT_INPUT_ERROR, EXIT_OK, RUN_CONFIG_RULES
from delaysim.cli import main, run
from delaysim.utils.errors import ConfigError
from delaysim.utils.reports import CheckReport, ReportWriter, format_value

ROOT = os.path.dirname(os.path.abspath(__file__))
RUNS = os.path.join(ROOT, 'config', 'runs')

RANDOM_NICHOLSON = """{
  "model": {"preset": "nicholson", "params": {"p1": 3.0, "end_time": 2.0}},
  "initial": {"kind": "random"},
  "stepper": {"scheme": "frozen_b", "dt": 0.05}
}
"""


def write_config(tmp_path, text, name='run.json'):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return path


def read_rows(path):
    with open(path, encoding='utf-8') as handle:
        lines = handle.read().splitlines()
    return lines[0], list(csv.reader(lines[1:]))


def test_solve_linear_benchmark(tmp_path):
    status = run(os.path.join(RUNS, 'linear_benchmark.json'), 'solve', tmp_path)
    assert status == EXIT_OK
    seed_line, rows = read_rows(tmp_path / 'linear_trajectory.csv')
    assert seed_line == '# seed=12345'
    assert rows[0] == ['time', 'species', 'mode_or_point', 'value']
    assert float(rows[-1][0]) == 2.0
    assert float(rows[-1][3]) == pytest.approx(3.5, abs=1e-10)
    assert (tmp_path / 'linear_solve_report.txt').exists()
    assert (tmp_path / 'linear_solve_diagnostics.csv').exists()


def test_same_seed_gives_identical_files(tmp_path):
    config = write_config(tmp_path, RANDOM_NICHOLSON)
    for name in ('first', 'second', 'third'):
        seed = 99 if name == 'third' else 5
        assert run(config, 'solve', tmp_path / name, seed=seed) == EXIT_OK
    first = (tmp_path / 'first' / 'trajectory.csv').read_bytes()
    assert first == (tmp_path / 'second' / 'trajectory.csv').read_bytes()
    assert first != (tmp_path / 'third' / 'trajectory.csv').read_bytes()


def test_negative_horizon_is_located(tmp_path, capsys):
    text = '{\n  "model": {\n    "preset": "nicholson",\n    "params": {"delay_horizon": -1.0}\n  }\n}\n'
    config = write_config(tmp_path, text)
    assert run(config, 'solve', tmp_path) == EXIT_INPUT_ERROR
    err = capsys.readouterr().err
    assert f"{config}:4:" in err
    assert 'delay_horizon' in err


@pytest.mark.parametrize('text', [
    '{"model": {"preset": "nicholson"',
    '{"model": {"preset": "nicholson"}, "colour": 1}',
    '{"model": {"preset": "nicholson", "params": {"p2": 1.0}}}',
    '{"model": {"preset": "nicholson"}, "stepper": {"dt": 2.0}}',
])
def test_bad_configs_exit_with_input_error(tmp_path, capsys, text):
    config = write_config(tmp_path, text)
    assert run(config, 'solve', tmp_path / 'out') == EXIT_INPUT_ERROR
    assert capsys.readouterr().err.startswith('error:')


def test_missing_file_and_bad_arguments(tmp_path):
    assert run(tmp_path / 'absent.json', 'solve', tmp_path) == EXIT_INPUT_ERROR
    config = write_config(tmp_path, RANDOM_NICHOLSON)
    assert run(config, 'plot', tmp_path) == EXIT_INPUT_ERROR
    assert run(config, 'solve', tmp_path, seed=-1) == EXIT_INPUT_ERROR


def test_argument_parser_rejects_unknown_subcommand():
    with pytest.raises(SystemExit) as excinfo:
        main(['--config', 'run.json', '--subcommand', 'plot'])
    assert excinfo.value.code == 2


def test_malformed_json_reports_line():
    with pytest.raises(ConfigError) as excinfo:
        parse_run_config('{\n  "model": {\n    "preset": "nicholson",\n  }\n}', 'bad.json')
    assert excinfo.value.line == 4
    assert str(excinfo.value).startswith('bad.json:4:')


@pytest.mark.parametrize('text, key', [
    ('[]', None),
    ('{"stepper": {}}', 'model'),
    ('{"model": {"preset": "nicholson", "inline": {}}}', 'model'),
    ('{"model": {"preset": "nicholson"}, "stepper": {"scheme": "rk4"}}', 'scheme'),
    ('{"model": {"preset": "nicholson"}, "stepper": {"dt": -0.1}}', 'dt'),
    ('{"model": {"preset": "nicholson"}, "probes": {"h_values": [0.001, 0.01]}}', 'h_values'),
    ('{"model": {"preset": "nicholson"}, "verify": {"dts": [0.1]}}', 'dts'),
    ('{"model": {"preset": "nicholson"}, "seed": -3}', 'seed'),
    ('{"model": {"preset": "nicholson"}, "grid": {"shape": "disk"}}', 'shape'),
])
def test_config_validation(text, key):
    with pytest.raises(ConfigError) as excinfo:
        parse_run_config(text)
    assert excinfo.value.key == key


def test_builder_errors_are_located():
    text = '{\n  "model": {\n    "preset": "nicholson",\n    "params": {\n      "p2": 1.0\n    }\n  }\n}'
    config = parse_run_config(text, 'run.json')
    with pytest.raises(ConfigError) as excinfo:
        config.build_preset()
    assert excinfo.value.line == 5
    assert excinfo.value.key == 'p2'


def test_config_overrides_reach_the_model():
    config = parse_run_config(json.dumps({
        'model': {'preset': 'nicholson', 'params': {'p1': 3.0}},
        'grid': {'domain': 'interval', 'length': 5.0, 'n_modes': 8, 'boundary': 'neumann'},
        'initial': {'kind': 'constant', 'value': 0.25},
        'stepper': {'dt': 0.05, 'end_time': 3.0},
        'constraint': {'kind': 'box', 'lower': [0.0], 'upper': [10.0]},
        'seed': 3,
    }))
    preset = config.build_preset()
    assert preset.grid.n_modes == 8
    assert preset.end_time == 3.0
    assert preset.constraint.kind == 'box'
    assert preset.initial.head.to_collocation().coefficients[0, 0] == pytest.approx(0.25)
    assert config.stepper_config(preset.end_time).dt == 0.05
    assert config.seed == 3


def test_shipped_configs_parse():
    for name in sorted(os.listdir(RUNS)):
        config = load_run_config(os.path.join(RUNS, name))
        assert config.source.endswith(name)


def test_schema_lists_every_config_key():
    with open(os.path.join(ROOT, 'config', 'run_config.schema.json'), encoding='utf-8') as handle:
        schema = json.load(handle)
    for section, keys in RUN_CONFIG_RULES['sections'].items():
        assert set(schema['properties'][section]['properties']) == set(keys)
    assert set(schema['properties']) == set(RUN_CONFIG_RULES['sections']) | set(RUN_CONFIG_RULES['scalars'])


def test_report_writer(tmp_path):
    writer = ReportWriter(tmp_path / 'reports', seed=7, prefix='demo')
    passing = CheckReport('growth', True, rows=[{'probe': 0, 'ratio': 0.5, 'passed': True}], message='fine')
    skipped = CheckReport('lipschitz', True, applicable=False)
    failing = CheckReport('bound', False, message='exceeded')
    path = writer.write_reports('checks', [passing, skipped, failing])

    assert path.name == 'demo_checks.txt'
    assert path.read_text(encoding='utf-8').splitlines() == [
        'seed: 7', 'PASS growth: fine', 'N/A  lipschitz', 'FAIL bound: exceeded',
    ]
    seed_line, rows = read_rows(tmp_path / 'reports' / 'demo_checks_growth.csv')
    assert seed_line == '# seed=7'
    assert rows == [['probe', 'ratio', 'passed'], ['0', '0.5', 'true']]
    assert writer.write_dict_rows('empty.csv', []) is None


def test_format_value():
    assert format_value(0.1) == '0.10000000000000001'
    assert format_value(None) == ''
    assert format_value(False) == 'false'
    assert format_value('picard') == 'picard'
