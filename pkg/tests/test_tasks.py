"""Testing of the episode generators, the image corpus and the tasks."""

import logging
import sys
from pathlib import Path
from tempfile import TemporaryDirectory
from unittest import TestCase, main

import numpy as np
from scipy.stats import norm

from sliced_cnp.cnp import init_params
from sliced_cnp.exceptions import (CheckpointError, ConfigError,
                                   ContractError, ImageFormatError,
                                   ShapeError)
from sliced_cnp.tasks import (GkParams, GkTask, TaskBatch, TileTask,
                              UniformRegressionTask, gen_gk_episode,
                              gen_linear_uniform, gen_tile_episode,
                              gk_quantile, gk_sample, image_to_tiles,
                              ingest_image_dir, make_task, normal_scores,
                              ols_fit, read_pnm, synth_images,
                              tiles_to_image, to_square, write_pgm)
from sliced_cnp.trainer import TrainConfig

logging.basicConfig(stream=sys.stderr)
log = logging.getLogger(__name__)
log.setLevel(logging.DEBUG)

THETA = GkParams(3.0, 1.0, 2.0, 0.5)


class TestTaskBatch(TestCase):

    def test_context_views(self):
        batch = TaskBatch(np.arange(4.0).reshape(4, 1),
                          np.arange(8.0).reshape(4, 2), [3, 1])
        self.assertEqual(batch.n_context, 2)
        np.testing.assert_array_equal(batch.x_context, [[3.0], [1.0]])
        np.testing.assert_array_equal(batch.y_context, [[6, 7], [2, 3]])

    def test_invalid_context(self):
        x, y = np.zeros((3, 1)), np.zeros((3, 1))
        for idx in ([], [0, 0], [3], [-1]):
            with self.subTest(idx=idx):
                with self.assertRaises(ContractError):
                    TaskBatch(x, y, idx)

    def test_row_mismatch(self):
        with self.assertRaises(ShapeError):
            TaskBatch(np.zeros((3, 1)), np.zeros((2, 1)), [0])

    def test_to_csv(self):
        batch = gen_linear_uniform(5, rng=0).with_context([0, 2])
        with TemporaryDirectory() as tmp:
            path = batch.to_csv(Path(tmp) / "e.csv", batch.y_target * 2)
            lines = path.read_text().splitlines()
        self.assertEqual(lines[0], "x0,y0,y_pred0,is_context")
        self.assertEqual(len(lines), 6)
        self.assertEqual([line.rsplit(",", 1)[1] for line in lines[1:]],
                         ["1", "0", "1", "0", "0"])


class TestRegression(TestCase):

    def test_generator_recovers_line(self):
        batch = gen_linear_uniform(500, rng=1)
        self.assertEqual(batch.n_context, 500)
        self.assertTrue(np.all(np.abs(batch.x_target) <= 2.0))
        slope, intercept = ols_fit(batch.x_target, batch.y_target)
        self.assertAlmostEqual(slope, 1.0, delta=0.1)
        self.assertAlmostEqual(intercept, 0.0, delta=0.1)

    def test_noise_free(self):
        batch = gen_linear_uniform(10, slope=2.0, intercept=-1.0,
                                   noise_sd=0.0, rng=2)
        np.testing.assert_allclose(batch.y_target, 2 * batch.x_target - 1)

    def test_invalid_arguments(self):
        with self.assertRaises(ContractError):
            gen_linear_uniform(1)
        with self.assertRaises(ContractError):
            gen_linear_uniform(10, x_range=(1.0, 1.0))
        with self.assertRaises(ContractError):
            gen_linear_uniform(10, noise_sd=-1.0)

    def test_task(self):
        config = TrainConfig.for_task("uniform_regression", n_points=50,
                                      n_eval=20, n_proj=10, hidden=8,
                                      r_dim=4)
        task = make_task(config)
        self.assertIsInstance(task, UniformRegressionTask)
        params = init_params(1, 1, hidden=8, r_dim=4, rng=0)
        first = task.evaluate(params)
        self.assertEqual(set(first), {"metric", "slope", "intercept"})
        self.assertEqual(first, task.evaluate(params))

        columns, table = task.eval_table(params, 7, 3)
        self.assertEqual(columns, ["x", "y_true", "y_pred"])
        self.assertEqual(table.shape, (7, 3))

        with TemporaryDirectory() as tmp:
            written = task.write_artifacts(params, tmp)
            self.assertEqual([p.name for p in written],
                             ["predictions.csv", "prediction_line.csv"])
            self.assertEqual(
                len(written[0].read_text().splitlines()), 51)

    def test_check_params(self):
        task = make_task(TrainConfig.for_task("uniform_regression"))
        with self.assertRaises(CheckpointError):
            task.check_params(init_params(2, 1, hidden=4, r_dim=2, rng=0))


class TestGk(TestCase):

    def test_median_is_location(self):
        self.assertEqual(float(gk_quantile(THETA, 0.5)), 3.0)
        samples = gk_sample(THETA, 100_000, rng=0)
        self.assertAlmostEqual(float(np.median(samples)), 3.0, delta=0.1)

    def test_probability_integral_transform(self):
        samples = np.sort(gk_sample(THETA, 10_000, rng=1))
        r = np.linspace(0.001, 0.999, 999)
        ecdf = np.searchsorted(samples, gk_quantile(THETA, r),
                               side="right") / samples.size
        self.assertLess(np.max(np.abs(ecdf - r)), 0.02)

    def test_collapse_moments(self):
        samples = gk_sample(GkParams(0.0, 1.0, 0.0, 0.0), 10_000, rng=4)
        self.assertLess(abs(samples.mean()), 0.05)
        self.assertTrue(0.9 < samples.var() < 1.1)

    def test_collapse_to_normal(self):
        theta = GkParams(0.0, 1.0, 0.0, 0.0)
        batch = gen_gk_episode(theta, 10, 40, rng=2)
        r = batch.x_target[10:]
        np.testing.assert_allclose(batch.y_target[10:], norm.ppf(r),
                                   atol=1e-9)

    def test_episode_layout(self):
        batch = gen_gk_episode(THETA, 5, 20, rng=3)
        self.assertEqual(batch.n_target, 25)
        np.testing.assert_array_equal(batch.context_idx, np.arange(5))
        self.assertTrue(np.all((batch.x_target > 0) & (batch.x_target < 1)))
        np.testing.assert_allclose(batch.y_target[5:],
                                   gk_quantile(THETA, batch.x_target[5:]))

    def test_normal_scores(self):
        r = np.array([0.025, 0.5, 0.975])
        np.testing.assert_allclose(normal_scores(r), [-1.959964, 0, 1.959964],
                                   atol=1e-6)
        edges = normal_scores([0.0, 1.0])
        self.assertTrue(np.all(np.isfinite(edges)))
        self.assertLess(edges[0], -8.0)

    def test_parameter_domain(self):
        with self.assertRaises(ContractError):
            GkParams(3.0, 1.0, 2.0, 11.0)
        with self.assertRaises(ContractError):
            GkParams.from_sequence([1.0, 2.0])
        with self.assertRaises(ContractError):
            gk_quantile(THETA, [0.0, 0.5])

    def test_task(self):
        config = TrainConfig.for_task("gk", n_eval=500, n_points=30,
                                      n_context=10, hidden=8, r_dim=4)
        task = make_task(config)
        self.assertIsInstance(task, GkTask)
        batch = task.episode(np.random.default_rng(5))
        positions = norm.cdf(batch.x_target[10:])
        np.testing.assert_allclose(batch.y_target[10:],
                                   gk_quantile(THETA, positions), rtol=1e-9,
                                   atol=1e-9)
        params = init_params(1, 1, hidden=8, r_dim=4, rng=0)
        scores = task.evaluate(params)
        self.assertGreaterEqual(scores["metric"], 0.0)
        self.assertGreater(scores["noise_floor"], 0.0)
        self.assertEqual(scores, task.evaluate(params))

        columns, table = task.eval_table(params, 11, 0)
        self.assertEqual(columns, ["model", "true"])
        self.assertEqual(table.shape, (11, 2))

        with TemporaryDirectory() as tmp:
            written = task.write_artifacts(params, tmp)
            quantiles = written[1].read_text().splitlines()
        self.assertEqual(quantiles[0], "r,q_true,q_model")
        self.assertEqual(len(quantiles), 100)


class TestTiles(TestCase):

    def setUp(self):
        self.image = np.random.default_rng(0).uniform(size=(32, 32, 1))

    def test_tile_order(self):
        grid = image_to_tiles(self.image)
        self.assertEqual(grid.tiles.shape, (64, 16))
        np.testing.assert_array_equal(grid.tiles[0],
                                      self.image[:4, :4, 0].ravel())
        np.testing.assert_array_equal(grid.tiles[1],
                                      self.image[:4, 4:8, 0].ravel())
        np.testing.assert_array_equal(grid.tiles[8],
                                      self.image[4:8, :4, 0].ravel())

    def test_round_trip(self):
        color = np.random.default_rng(1).uniform(size=(32, 32, 3))
        for image in (self.image, color):
            grid = image_to_tiles(image)
            np.testing.assert_array_equal(tiles_to_image(grid), image)

    def test_wrong_size(self):
        with self.assertRaises(ContractError):
            image_to_tiles(np.zeros((16, 16)))

    def test_episode(self):
        batch = gen_tile_episode(image_to_tiles(self.image), 10, rng=2)
        np.testing.assert_array_equal(batch.x_target, np.eye(64))
        self.assertEqual(batch.n_context, 10)
        for n in (3, 17):
            with self.assertRaises(ContractError):
                gen_tile_episode(image_to_tiles(self.image), n)

    def _config(self, **kwargs):
        settings = dict(n_images=3, n_holdout=2, n_proj=10, hidden=8, r_dim=4)
        settings.update(kwargs)
        return TrainConfig.for_task("tiles", **settings)

    def test_synthetic_task(self):
        task = make_task(self._config())
        self.assertIsInstance(task, TileTask)
        self.assertTrue(task.fixed_context)
        self.assertEqual((task.d_x, task.d_y), (64, 16))
        batch = task.episode(np.random.default_rng(0))
        self.assertTrue(4 <= batch.n_context <= 16)

        params = init_params(64, 16, hidden=8, r_dim=4, rng=0)
        scores = task.evaluate(params)
        self.assertTrue(np.isfinite(scores["metric"]))
        self.assertEqual(scores, task.evaluate(params))

        with TemporaryDirectory() as tmp:
            written = task.write_artifacts(params, tmp)
            names = sorted(p.name for p in written)
            self.assertEqual(len(written), 7)
            self.assertIn("holdout00_reconstruction.pgm", names)
            self.assertEqual(read_pnm(written[-1]).shape, (32, 32, 1))

    def test_image_dir_task(self):
        with TemporaryDirectory() as tmp:
            for i, image in enumerate(synth_images(3, seed=4)):
                write_pgm(Path(tmp) / f"img{i}.pgm", image)
            task = make_task(self._config(image_dir=tmp))
            self.assertEqual(len(task.train_images), 1)
            self.assertEqual(len(task.holdout_images), 2)
            with self.assertRaises(ConfigError):
                make_task(self._config(image_dir=tmp, n_holdout=3))

    def test_unknown_task(self):
        with self.assertRaises(ConfigError):
            make_task(TrainConfig().replace(task="mnist"))


class TestImages(TestCase):

    def setUp(self):
        self._tmp = TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_synthetic_range_and_seed(self):
        images = synth_images(6, channels=3, seed=5)
        for image in images:
            self.assertEqual(image.shape, (32, 32, 3))
            self.assertTrue(np.all((image >= 0) & (image <= 1)))
        # image i of the mixed corpus is regenerated from seed + i
        again = synth_images(1, kind="stripes", channels=3, seed=7)[0]
        np.testing.assert_array_equal(images[2], again)

    def test_gradient_monotone(self):
        for image in synth_images(8, kind="gradient", seed=9):
            for axis in (0, 1):
                step = np.diff(image[..., 0], axis=axis)
                self.assertTrue(np.all(step >= -1e-12) or
                                np.all(step <= 1e-12))

    def test_synthetic_invalid(self):
        with self.assertRaises(ContractError):
            synth_images(2, kind="noise")
        with self.assertRaises(ContractError):
            synth_images(2, channels=2)

    def test_pgm_with_comment(self):
        raster = bytes(range(16))
        path = self.tmp / "c.pgm"
        path.write_bytes(b"P5\n# made by hand\n4 4\n255\n" + raster)
        image = read_pnm(path)
        self.assertEqual(image.shape, (4, 4, 1))
        self.assertAlmostEqual(image[3, 3, 0], 15 / 255)

    def test_write_read(self):
        image = np.round(synth_images(1, channels=3, seed=0)[0] * 255) / 255
        path = write_pgm(self.tmp / "c.ppm", image)
        self.assertTrue(path.read_bytes().startswith(b"P6"))
        np.testing.assert_allclose(read_pnm(path), image, atol=1e-12)

    def test_bad_files(self):
        cases = {
            "ascii.pgm": b"P2\n2 2\n255\n0 0 0 0\n",
            "short.pgm": b"P5\n4 4\n255\n" + bytes(3),
            "deep.pgm": b"P5\n2 2\n65535\n" + bytes(8),
        }
        for name, data in cases.items():
            (self.tmp / name).write_bytes(data)
            with self.subTest(name=name):
                with self.assertRaises(ImageFormatError):
                    read_pnm(self.tmp / name)

    def test_to_square(self):
        image = np.random.default_rng(0).uniform(size=(32, 40, 1))
        np.testing.assert_allclose(to_square(image), image[:, 4:36],
                                   atol=1e-15)
        blocks = np.random.default_rng(1).uniform(size=(64, 64, 2))
        expected = blocks.reshape(32, 2, 32, 2, 2).mean(axis=(1, 3))
        np.testing.assert_allclose(to_square(blocks), expected, atol=1e-12)
        big = np.full((64, 80, 3), 0.25)
        np.testing.assert_allclose(to_square(big), 0.25)
        with self.assertRaises(ContractError):
            to_square(np.zeros((31, 64, 1)))

    def test_to_square_uneven_side(self):
        ramp = np.tile(np.linspace(0, 1, 63), (63, 1))[..., None]
        out = to_square(ramp)[0, :, 0]
        self.assertLess(out[0], 0.02)
        self.assertGreater(out[-1], 0.98)
        self.assertTrue(np.all(np.diff(out) > 0))
        np.testing.assert_allclose(to_square(np.full((63, 70, 1), 0.6)), 0.6)

    def test_ingest_dir(self):
        for i, image in enumerate(synth_images(3, channels=3, seed=1)):
            write_pgm(self.tmp / f"img{i}.ppm", image)
        (self.tmp / "junk.pgm").write_bytes(b"not an image")
        (self.tmp / "notes.txt").write_text("ignored")

        images = ingest_image_dir(self.tmp, channels=1)
        self.assertEqual(len(images), 3)
        self.assertEqual(images[0].shape, (32, 32, 1))
        self.assertEqual(len(ingest_image_dir(self.tmp, limit=2)), 2)

    def test_ingest_errors(self):
        with self.assertRaises(FileNotFoundError):
            ingest_image_dir(self.tmp / "missing")
        (self.tmp / "junk.pgm").write_bytes(b"P5\n")
        with self.assertRaises(ImageFormatError):
            ingest_image_dir(self.tmp)


if __name__ == "__main__":
    main()
