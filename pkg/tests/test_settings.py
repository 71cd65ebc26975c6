"""
Test workbench settings
"""

import os
import shutil
import tempfile
import unittest

import yaml

from config.settings import DEFAULT_SETTINGS, Settings


class TestSettings(unittest.TestCase):
    """Test the YAML backed settings manager"""

    def setUp(self):
        """Set up a private settings file"""
        self.temp_dir = tempfile.mkdtemp()
        self.config_path = os.path.join(self.temp_dir, 'workbench.yaml')

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_defaults_without_file(self):
        """Missing file falls back to the built-in defaults"""
        settings = Settings(self.config_path)
        self.assertEqual(settings.get('caps.spectrum_dim'), 4096)
        self.assertEqual(settings.get('evolve.method'), 'DOP853')
        self.assertEqual(settings.get_float('tolerances.zero_mode'), 1e-8)
        self.assertIsNone(settings.get('no.such.key'))
        self.assertEqual(settings.get('no.such.key', 7), 7)

    def test_loaded_file_merges_with_defaults(self):
        """Keys in the file override defaults and the rest are kept"""
        with open(self.config_path, 'w') as f:
            yaml.safe_dump({'tolerances': {'zero_mode': 1e-9}, 'logging': {'level': 'DEBUG'}}, f)
        settings = Settings(self.config_path)
        self.assertEqual(settings.get_float('tolerances.zero_mode'), 1e-9)
        self.assertEqual(settings.get_float('tolerances.hermitian'), 1e-12)
        self.assertEqual(settings.get('logging.level'), 'DEBUG')

    def test_text_numbers_are_coerced(self):
        """YAML 1.1 reads 1e-8 as text; numeric getters still return numbers"""
        with open(self.config_path, 'w') as f:
            f.write("diagnostics:\n  im_floor: 1e-5\n")
        settings = Settings(self.config_path)
        self.assertEqual(settings.get_float('diagnostics.im_floor'), 1e-5)

    def test_set_save_reload(self):
        """Values set with dot notation survive save and reload"""
        settings = Settings(self.config_path)
        settings.set('workbench.workers', 4)
        settings.set('custom.nested.value', 'x')
        settings.save()

        reloaded = Settings(self.config_path)
        self.assertEqual(reloaded.get_int('workbench.workers'), 4)
        self.assertEqual(reloaded.get('custom.nested.value'), 'x')

        reloaded.set('workbench.workers', 1)
        reloaded.reload()
        self.assertEqual(reloaded.get_int('workbench.workers'), 4)

    def test_defaults_not_shared(self):
        """Changing one instance leaves the module defaults untouched"""
        settings = Settings(self.config_path)
        settings.set('caps.two_spin_S', 1)
        self.assertEqual(DEFAULT_SETTINGS['caps']['two_spin_S'], 4)

    def test_unreadable_file_keeps_defaults(self):
        """Broken YAML is logged and the defaults are used"""
        with open(self.config_path, 'w') as f:
            f.write("tolerances: [unclosed\n")
        settings = Settings(self.config_path)
        self.assertEqual(settings.get('caps.two_spin_S'), 4)

    def test_shipped_file_matches_defaults(self):
        """config/workbench.yaml carries the same numbers as the built-in defaults"""
        shipped = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'config', 'workbench.yaml')
        settings = Settings(shipped)
        for section, values in DEFAULT_SETTINGS.items():
            for key, value in values.items():
                loaded = settings.get(f'{section}.{key}')
                if isinstance(value, float):
                    self.assertAlmostEqual(float(loaded), value, msg=f'{section}.{key}')
                else:
                    self.assertEqual(loaded, value, msg=f'{section}.{key}')


if __name__ == '__main__':
    unittest.main()
