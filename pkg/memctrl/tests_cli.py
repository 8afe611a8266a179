# memctrl/tests_cli.py

"""
Test cases for the memctrl command line and the experiment registry.
Tests exit codes, results.json contents, CSV artifacts and config templates.
"""

import json
import os
import tempfile
import unittest
from unittest.mock import patch

import jsonschema
import numpy as np
import yaml
from click.testing import CliRunner

from .config import ExperimentKind, load_config, parse_config
from .core.kernels import TimeGrid
from .core.moment import TargetClass, constraint_values
from .core.spectral import build_interval_basis
from .core.synthesis import GeneratorShape
from .exceptions import ConfigError, ObstructionVanishes
from .experiments import EXPERIMENT_REGISTRY, render_template, zeta_convergence
from .management import cli
from .utils.exporters import ExperimentResult
from .utils.schemas import RESULTS_SCHEMA


# =============================================================================
# MOCK DATA FIXTURES
# =============================================================================

def steer_config(output_dir):
    return {
        'experiment': 'steer',
        'b': 0.0,
        'kernel': {'family': 'zero'},
        'T': 2.5,
        'n_modes': 12,
        'grid': 4096,
        'control_class': 'H10',
        'target': {'generator': 'inverse_power', 'power': 2.0, 'component': 'xi'},
        'output_dir': output_dir,
    }


def regularity_config(output_dir):
    return {
        'experiment': 'regularity',
        'kernel': {'family': 'exponential', 'k0': 1.0, 'a': 1.0},
        'T': 2.0,
        'n_modes': 48,
        'grid': 8192,
        'control_class': 'H30',
        'output_dir': output_dir,
    }


def zeta_config(kernel, modes, grid=256):
    return {
        'experiment': 'zeta-convergence',
        'kernel': kernel,
        'T': 2.0,
        'grid': grid,
        'zeta_study': {'modes': modes, 'levels': 3},
    }


class CliTestCase(unittest.TestCase):
    """Temp directory plus a CliRunner"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.runner = CliRunner()

    def path(self, *parts):
        return os.path.join(self.tmp.name, *parts)

    def write_config(self, data, name='config.json'):
        path = self.path(name)
        with open(path, 'w', encoding='utf-8') as handle:
            if name.endswith(('.yaml', '.yml')):
                yaml.safe_dump(data, handle)
            else:
                json.dump(data, handle)
        return path

    def read_results(self, output_dir):
        with open(os.path.join(output_dir, 'results.json'), encoding='utf-8') as handle:
            return json.load(handle)


# =============================================================================
# RUN COMMAND TESTS
# =============================================================================

class TestRunCommand(CliTestCase):
    """Test `memctrl run`"""

    def test_steer_acceptance(self):
        out = self.path('steer')
        result = self.runner.invoke(cli, ['run', self.write_config(steer_config(out))])
        self.assertEqual(result.exit_code, 0, msg=result.output)

        payload = self.read_results(out)
        jsonschema.validate(payload, RESULTS_SCHEMA)
        self.assertTrue(payload['passed'])
        self.assertLessEqual(payload['verdicts']['reach_error'], 1e-3)
        self.assertEqual(payload['verdicts']['tail_k1'], 'summable')
        self.assertIn('control.csv', payload['artifacts'])
        self.assertTrue(os.path.exists(os.path.join(out, 'coefficients.csv')))
        self.assertIn('PASSED', result.output)

    def test_negative_horizon(self):
        config = steer_config(self.path('bad'))
        config['T'] = -1
        result = self.runner.invoke(cli, ['run', self.write_config(config)])
        self.assertEqual(result.exit_code, 1)
        self.assertIn('T:', result.output)

    def test_unknown_field(self):
        config = steer_config(self.path('bad'))
        config['colour'] = 'blue'
        result = self.runner.invoke(cli, ['run', self.write_config(config)])
        self.assertEqual(result.exit_code, 1)
        self.assertIn('colour', result.output)

    def test_malformed_json(self):
        path = self.path('broken.json')
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write('{"experiment": "steer",\n  "T": }')
        result = self.runner.invoke(cli, ['run', path])
        self.assertEqual(result.exit_code, 1)
        self.assertIn('line 2', result.output)

    def test_regularity_acceptance(self):
        out = self.path('regularity')
        result = self.runner.invoke(cli, ['run', self.write_config(regularity_config(out))])
        self.assertEqual(result.exit_code, 0, msg=result.output)
        payload = self.read_results(out)
        self.assertEqual(payload['verdicts']['verdict_k3'], 'divergent')
        self.assertEqual(payload['verdicts']['control_verdict_k3'], 'summable')
        self.assertIn('tails.csv', payload['artifacts'])

    def test_results_reproducible(self):
        """Same config and seed give the same results.json up to the timestamp"""
        out = self.path('repeat')
        config = steer_config(out)
        config.update({'n_modes': 4, 'grid': 1024, 'control_class': 'L2',
                       'target': {'generator': 'random', 'decay': 1.0}, 'seed': 3})
        path = self.write_config(config)

        payloads = []
        for _ in range(2):
            result = self.runner.invoke(cli, ['run', path])
            self.assertEqual(result.exit_code, 0, msg=result.output)
            payload = self.read_results(out)
            payload.pop('timestamp')
            payloads.append(payload)
        self.assertEqual(payloads[0], payloads[1])

    def test_riesz_from_yaml(self):
        out = self.path('riesz')
        config = {'experiment': 'riesz', 'T': 2.0, 'n_modes': 8, 'grid': 1024,
                  'control_class': 'L2', 'output_dir': out}
        result = self.runner.invoke(cli, ['run', self.write_config(config, 'riesz.yaml')])
        self.assertEqual(result.exit_code, 0, msg=result.output)
        payload = self.read_results(out)
        self.assertTrue(payload['verdicts']['is_riesz'])
        self.assertIn('gram_spectrum.csv', payload['artifacts'])
        self.assertIn('kernels.csv', payload['artifacts'])

    def test_under_resolved_grid(self):
        config = zeta_config({'family': 'zero'}, [16], grid=16)
        config['output_dir'] = self.path('zeta')
        result = self.runner.invoke(cli, ['run', self.write_config(config)])
        self.assertEqual(result.exit_code, 1)
        self.assertIn('UnderResolved', result.output)

    @patch('memctrl.management.commands.run.run_experiment')
    def test_inconclusive_exit_code(self, mock_run):
        mock_run.side_effect = ObstructionVanishes(0.0)
        result = self.runner.invoke(cli, ['run', self.write_config(steer_config(self.path('x')))])
        self.assertEqual(result.exit_code, 2)

    @patch('memctrl.management.commands.run.run_experiment')
    def test_failed_verdict_exit_code(self, mock_run):
        mock_run.return_value = ExperimentResult(
            experiment='steer', passed=False, summary={}, verdicts={'reach': 'fail'},
        )
        out = self.path('failed')
        result = self.runner.invoke(cli, ['run', self.write_config(steer_config(out))])
        self.assertEqual(result.exit_code, 2)
        self.assertFalse(self.read_results(out)['passed'])


# =============================================================================
# CONFIG TEMPLATE TESTS
# =============================================================================

class TestDefaultConfig(CliTestCase):
    """Test `memctrl print-default-config`"""

    def test_templates_parse_back(self):
        for kind in ExperimentKind:
            result = self.runner.invoke(cli, ['print-default-config', kind.value])
            self.assertEqual(result.exit_code, 0)
            self.assertTrue(result.output.startswith('#'))
            config = parse_config(yaml.safe_load(result.output))
            self.assertEqual(config.experiment, kind)

    def test_templates_use_block_style(self):
        for kind in ExperimentKind:
            text = render_template(kind)
            self.assertFalse([line for line in text.splitlines() if line.lstrip().startswith('{')], msg=kind.value)
            path = self.path(f'{kind.value}.yaml')
            with open(path, 'w', encoding='utf-8') as handle:
                handle.write(text)
            self.assertEqual(load_config(path).experiment, kind)

    def test_json_template(self):
        result = self.runner.invoke(cli, ['print-default-config', 'riesz', '--json'])
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(json.loads(result.output)['experiment'], 'riesz')

    def test_unknown_experiment(self):
        result = self.runner.invoke(cli, ['print-default-config', 'teleport'])
        self.assertNotEqual(result.exit_code, 0)

    def test_registry_covers_every_kind(self):
        self.assertEqual(set(EXPERIMENT_REGISTRY), set(ExperimentKind))
        self.assertIn('T', render_template(ExperimentKind.STEER))


class TestLoadConfig(CliTestCase):
    """Test load_config diagnostics and the config builders"""

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_config(self.path('nope.json'))

    def test_generated_targets_are_real_states(self):
        """b = 15 makes lambda_1 imaginary; generated sequences still describe a real state"""
        basis = build_interval_basis(15.0, 6)
        for target_cfg in ({'generator': 'inverse_power'}, {'generator': 'random'},
                           {'generator': 'explicit', 'xi': [1.0] * 6, 'eta': [0.5] * 6}):
            cfg = parse_config({'experiment': 'steer', 'b': 15.0, 'n_modes': 6, 'target': target_cfg})
            target = cfg.target.build(TargetClass.H10xL2, basis, cfg.seed)
            state = target.to_state(basis)
            np.testing.assert_allclose(state.w.imag, 0.0, atol=1e-14)
            np.testing.assert_allclose(state.v.imag, 0.0, atol=1e-14)

    def test_regularity_generators(self):
        grid = TimeGrid(2.0, 512)
        periodic = parse_config({'experiment': 'regularity'}).regularity
        self.assertEqual(periodic.generator, GeneratorShape.PERIODIC)
        sine_cfg = {'experiment': 'regularity', 'regularity': {'generator': 'sine', 'frequency': 3}}
        sine = parse_config(sine_cfg).regularity
        for signal in (periodic.generator_signal(grid), sine.generator_signal(grid)):
            for value in constraint_values(signal, 3):
                self.assertLess(abs(value), 1e-10)
        self.assertGreater((periodic.generator_signal(grid) - sine.generator_signal(grid)).sup(), 0.1)

    def test_tabulated_needs_csv(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config({'experiment': 'steer', 'kernel': {'family': 'tabulated'}})
        self.assertIn('kernel', ctx.exception.render())


# =============================================================================
# ZETA CONVERGENCE TESTS
# =============================================================================

class TestZetaConvergence(unittest.TestCase):
    """Test the Richardson study"""

    def test_memoryless_second_order(self):
        report = zeta_convergence(parse_config(zeta_config({'family': 'zero'}, [1])))
        self.assertEqual(report.reference, 'closed_form')
        self.assertAlmostEqual(report.observed_order(1), 2.0, delta=0.2)

    def test_memory_self_convergence(self):
        kernel = {'family': 'exponential', 'k0': 1.0, 'a': 1.0}
        report = zeta_convergence(parse_config(zeta_config(kernel, [4], grid=512)))
        self.assertEqual(report.reference, 'self')
        self.assertAlmostEqual(report.observed_order(4), 2.0, delta=0.3)
        self.assertLess(report.picard_distance[4], 1e-3)


if __name__ == '__main__':
    unittest.main()
