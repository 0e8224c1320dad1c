"""
Copyright 2025 local-metric contributors
"""
import unittest
import os
import pathlib
import shutil
os.environ["CONFIG_FILE"] = str(pathlib.Path(__file__).parent.parent.parent / "config.yaml")
os.environ.setdefault("LOCAL_METRIC_HOME", str(pathlib.Path(__file__).parent.parent.parent / "tmp"))

from local_metric.core.utils.app_config import get_benchmark_settings, get_config, load_train_config
from local_metric.core.utils.errors import ConfigurationError

TMP_DIR = pathlib.Path(__file__).parent.parent.parent / "tmp" / "app_config"


class TestAppConfig(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        os.makedirs(TMP_DIR, exist_ok=True)

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(TMP_DIR, ignore_errors=True)

    def test_app_config(self):
        config = get_config()
        assert config["app"]["logging"] == "DEBUG"
        assert config["training"]["alpha"] == 0.1

    def test_defaults(self):
        config = load_train_config()
        assert config.alpha == 0.1
        assert config.margin_c == 0.5
        assert config.k_neighbors == 10
        assert config.num_regions == 4

    def test_toml_file_and_overrides(self):
        path = TMP_DIR / "train.toml"
        path.write_text("[training]\nk_neighbors = 3\nnum_regions = 2\nlearning_rate = 0.05\n")
        config = load_train_config(str(path), overrides={"num_regions": 1, "alpha": None})
        assert config.k_neighbors == 3
        assert config.num_regions == 1
        assert config.learning_rate == 0.05
        assert config.alpha == 0.1

    def test_flat_yaml_file(self):
        path = TMP_DIR / "train.yaml"
        path.write_text("margin_c: 0.25\nmax_epochs: 7\n")
        config = load_train_config(str(path))
        assert config.margin_c == 0.25
        assert config.max_epochs == 7

    def test_invalid_values(self):
        with self.assertRaises(ConfigurationError):
            load_train_config(overrides={"margin_c": 1.5})
        with self.assertRaises(ConfigurationError):
            load_train_config(overrides={"k_neighbors": 0})
        with self.assertRaises(ConfigurationError):
            load_train_config(str(TMP_DIR / "missing.toml"))
        broken = TMP_DIR / "broken.toml"
        broken.write_text("k_neighbors = = 3\n")
        with self.assertRaises(ConfigurationError):
            load_train_config(str(broken))

    def test_benchmark_settings(self):
        settings = get_benchmark_settings()
        assert settings["repeats"] == 10
        assert settings["train_fraction"] == 0.6
        assert settings["statistics"] == "train"


if __name__ == '__main__':
    unittest.main()
