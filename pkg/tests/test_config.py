import json
import tempfile
import unittest
from unittest.mock import patch
import sys
import os

# Add src to path
sys.path.append(os.path.join(os.path.dirname(__file__), '../src'))

from threshscatter.config import (DEFAULT_GRID_N, GRID_N_ENV, GridConfig, RunConfig, default_grid_n,
                                  load_config, validate_config)


class TestGridDefault(unittest.TestCase):

    @patch.dict(os.environ, {GRID_N_ENV: "512"})
    def test_env_overrides_default(self):
        self.assertEqual(default_grid_n(), 512)
        self.assertEqual(GridConfig().n, 512)

    @patch.dict(os.environ, {GRID_N_ENV: "lots"})
    def test_garbage_env_is_ignored(self):
        with self.assertLogs('threshscatter.config', level='WARNING'):
            self.assertEqual(default_grid_n(), DEFAULT_GRID_N)

    @patch.dict(os.environ, {GRID_N_ENV: "8"})
    def test_out_of_range_env_is_ignored(self):
        with self.assertLogs('threshscatter.config', level='WARNING'):
            self.assertEqual(default_grid_n(), DEFAULT_GRID_N)

    @patch.dict(os.environ, {GRID_N_ENV: "512"})
    def test_explicit_value_wins(self):
        self.assertEqual(GridConfig(n=1024).n, 1024)


class TestValidation(unittest.TestCase):

    def test_minimal_config(self):
        config = validate_config({'task': 'constants', 'm': 6})
        self.assertEqual(config.m, 6)
        self.assertEqual(config.seed, 0)
        self.assertEqual(config.tolerances.identity_tol, 1e-10)

    def test_task_is_required(self):
        with self.assertRaisesRegex(ValueError, "task"):
            validate_config({})

    def test_dimension_floor(self):
        with self.assertRaisesRegex(ValueError, "m: "):
            validate_config({'task': 'constants', 'm': 2})

    def test_grid_limits(self):
        with self.assertRaisesRegex(ValueError, "grid"):
            validate_config({'task': 'probe', 'grid': {'n': 8}})
        with self.assertRaisesRegex(ValueError, "r_min"):
            validate_config({'task': 'probe', 'grid': {'r_min': 2.0, 'r_max': 1.0}})

    def test_scales_sorted(self):
        config = validate_config({'task': 'probe', 'scales': [4, 1, 2]})
        self.assertEqual(config.scales, [1.0, 2.0, 4.0])
        with self.assertRaises(ValueError):
            validate_config({'task': 'probe', 'scales': [1, -2]})

    def test_lambda_alias(self):
        self.assertEqual(validate_config({'task': 'representation', 'lambda': 0.25}).lambda_, 0.25)
        self.assertEqual(RunConfig(task='representation', lambda_=0.75).lambda_, 0.75)


class TestLoadConfig(unittest.TestCase):

    def write(self, text):
        handle = tempfile.NamedTemporaryFile('w', suffix='.yaml', delete=False)
        handle.write(text)
        handle.close()
        self.addCleanup(os.unlink, handle.name)
        return handle.name

    def test_json_is_accepted(self):
        path = self.write(json.dumps({'task': 'kernel-check', 'm': 5, 'samples': 7, 'seed': 3}))
        config = load_config(path)
        self.assertEqual((config.task, config.m, config.samples, config.seed), ('kernel-check', 5, 7, 3))

    def test_yaml_is_accepted(self):
        path = self.write("task: probe\np: 2.5\noperator: zs+correction\nfamily: window\n")
        config = load_config(path)
        self.assertEqual(config.operator, 'zs+correction')
        self.assertEqual(config.family, 'window')

    def test_empty_file_is_a_usage_error(self):
        with self.assertRaisesRegex(ValueError, "validation failed"):
            load_config(self.write(""))

    def test_non_mapping(self):
        with self.assertRaisesRegex(ValueError, "expected a mapping"):
            load_config(self.write("- 1\n- 2\n"))

    def test_parse_error(self):
        with self.assertRaisesRegex(ValueError, "Error parsing"):
            load_config(self.write("task: [unclosed\n"))

    def test_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            load_config("/nonexistent/threshscatter.yaml")


if __name__ == '__main__':
    unittest.main()
