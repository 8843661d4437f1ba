"""Testing of the command line front end and its exit codes."""

import json
import logging
import sys
from contextlib import redirect_stderr
from io import StringIO
from pathlib import Path
from tempfile import TemporaryDirectory
from unittest import TestCase, main

from sliced_cnp.cli import main as cli_main
from sliced_cnp.selfcheck import run_selfcheck

logging.basicConfig(stream=sys.stderr)
log = logging.getLogger(__name__)
log.setLevel(logging.DEBUG)

TINY_CONFIG = """
# short regression run
n_points = 40
n_eval = 20
hidden = 8
r_dim = 4
n_proj = 10
"""


def run(*argv: str) -> int:
    """Call the CLI with stderr captured."""
    with redirect_stderr(StringIO()):
        return cli_main(list(argv))


class TestCli(TestCase):

    @classmethod
    def setUpClass(cls):
        cls._tmp = TemporaryDirectory()
        cls.tmp = Path(cls._tmp.name)
        cls.conf = cls.tmp / "tiny.conf"
        cls.conf.write_text(TINY_CONFIG)
        cls.run_dir = cls.tmp / "run"
        cls.train_code = run(
            "train", "--task", "uniform_regression", "--config",
            str(cls.conf), "--epochs", "4", "--eval-every", "2",
            "--checkpoint-every", "2", "--seed", "3", "--out",
            str(cls.run_dir), "-q"
        )

    @classmethod
    def tearDownClass(cls):
        cls._tmp.cleanup()

    def test_train(self):
        self.assertEqual(self.train_code, 0)
        manifest = json.loads((self.run_dir / "manifest.json").read_text())
        self.assertEqual(manifest["command"], "train")
        self.assertEqual(manifest["config"]["seed"], 3)
        self.assertEqual(manifest["config"]["n_points"], 40)
        self.assertIn("model.ckpt", manifest["outputs"])
        self.assertIn("checkpoints/step_000002.ckpt", manifest["outputs"])

    def test_eval(self):
        out = self.tmp / "eval"
        code = run("eval", "--checkpoint", str(self.run_dir / "model.ckpt"),
                   "--n-samples", "15", "--out", str(out), "-q")
        self.assertEqual(code, 0)
        rows = (out / "eval_uniform_regression.csv").read_text().splitlines()
        self.assertEqual(rows[0], "x,y_true,y_pred")
        self.assertEqual(len(rows), 16)
        self.assertTrue((out / "manifest.json").is_file())

    def test_sample(self):
        out = self.tmp / "sample"
        code = run("sample", "--checkpoint", str(self.run_dir / "model.ckpt"),
                   "--out", str(out), "-q")
        self.assertEqual(code, 0)
        rows = (out / "samples_uniform_regression.csv").read_text()
        self.assertEqual(len(rows.splitlines()), 41)

    def test_missing_checkpoint(self):
        code = run("eval", "--checkpoint", str(self.tmp / "none.ckpt"),
                   "--out", str(self.tmp / "e"), "-q")
        self.assertEqual(code, 1)

    def test_checkpoint_task_mismatch(self):
        code = run("eval", "--checkpoint", str(self.run_dir / "model.ckpt"),
                   "--task", "tiles", "--out", str(self.tmp / "e"), "-q")
        self.assertEqual(code, 1)

    def test_unknown_task(self):
        self.assertEqual(run("train", "--task", "mnist", "-q"), 2)

    def test_invalid_value(self):
        code = run("train", "--p0", "0", "--out", str(self.tmp / "bad"),
                   "-q")
        self.assertEqual(code, 2)
        self.assertFalse((self.tmp / "bad").exists())

    def test_invalid_sample_count(self):
        code = run("eval", "--checkpoint", str(self.run_dir / "model.ckpt"),
                   "--n-samples", "0", "-q")
        self.assertEqual(code, 2)

    def test_missing_config_file(self):
        code = run("train", "--config", str(self.tmp / "none.conf"), "-q")
        self.assertEqual(code, 2)

    def test_unwritable_output(self):
        blocker = self.tmp / "blocker"
        blocker.write_text("")
        code = run("train", "--config", str(self.conf), "--epochs", "2",
                   "--out", str(blocker / "run"), "-q")
        self.assertEqual(code, 1)

    def test_selfcheck(self):
        self.assertEqual(run("selfcheck", "-q"), 0)

    def test_selfcheck_every_check_passes(self):
        results = run_selfcheck(quiet=True)
        self.assertTrue(results)
        for r in results:
            with self.subTest(check=r.name):
                self.assertTrue(r.passed, r.detail)

    def test_no_command(self):
        self.assertEqual(run(), 2)


if __name__ == "__main__":
    main()
