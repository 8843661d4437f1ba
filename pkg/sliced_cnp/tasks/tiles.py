"""Image completion from a handful of observed 4x4 tiles.

A 32x32 image is cut into an 8x8 grid of tiles. Tile positions are one-hot
inputs, flattened tile pixels are outputs, and the model predicts all 64
tiles from 4 to 16 observed ones.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Tuple

import numpy as np

from ..abstract import TaskABC
from ..cnp import predict
from ..constants import HOLDOUT_OFFSET, IMAGE_SIZE, N_TILES, TILE_SIZE
from ..exceptions import ConfigError, ContractError
from ..transport import sliced_wasserstein_report
from ..utils import as_generator
from ._episode import TaskBatch
from .images import ingest_image_dir, synth_images, write_pgm

if TYPE_CHECKING:
    from ..cnp import ModelParams
    from ..typeshed import _IMAGES, _PATH, _RNG

__all__ = ["TileGrid", "image_to_tiles", "tiles_to_image",
           "gen_tile_episode", "TileTask"]

log = logging.getLogger(__name__)

_PER_SIDE = IMAGE_SIZE // TILE_SIZE
#: inclusive bounds of the observed tile count
CONTEXT_RANGE = (4, 16)
#: holdout reconstructions dumped as images
N_DUMPS = 4


@dataclass(frozen=True)
class TileGrid:
    """64 flattened tiles of one image, row-major grid, channel-last pixels.

    Parameters
    ----------
    tiles: np.ndarray
        (64, 16 * channels) array
    channels: int
        1 or 3
    """

    tiles: np.ndarray
    channels: int

    def __post_init__(self):
        expected = (N_TILES, TILE_SIZE ** 2 * self.channels)
        if self.tiles.shape != expected:
            raise ContractError(f"tile array must be {expected}, got "
                                f"{self.tiles.shape}")

    @property
    def image_size(self) -> Tuple[int, int]:
        return IMAGE_SIZE, IMAGE_SIZE

    @property
    def tile_size(self) -> Tuple[int, int]:
        return TILE_SIZE, TILE_SIZE

    @property
    def tile_width(self) -> int:
        return self.tiles.shape[1]


def image_to_tiles(image: np.ndarray) -> TileGrid:
    """Cut a 32x32 image into its 8x8 tile grid.

    Tile 0 holds pixels (0..3, 0..3), tile 1 the next 4 columns.

    Raises
    ------
    ContractError
        if the image is not 32x32 with 1 or 3 channels
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        image = image[..., None]
    if image.shape[:2] != (IMAGE_SIZE, IMAGE_SIZE) or \
            image.shape[2] not in (1, 3):
        raise ContractError(f"image must be {IMAGE_SIZE}x{IMAGE_SIZE} with 1 "
                            f"or 3 channels, got {image.shape}")
    channels = image.shape[2]
    tiles = (image.reshape(_PER_SIDE, TILE_SIZE, _PER_SIDE, TILE_SIZE,
                           channels)
             .transpose(0, 2, 1, 3, 4)
             .reshape(N_TILES, TILE_SIZE * TILE_SIZE * channels))
    return TileGrid(np.ascontiguousarray(tiles), channels)


def tiles_to_image(grid: TileGrid) -> np.ndarray:
    """Inverse of :func:`image_to_tiles`, returns (32, 32, channels)."""
    c = grid.channels
    return np.ascontiguousarray(
        grid.tiles.reshape(_PER_SIDE, _PER_SIDE, TILE_SIZE, TILE_SIZE, c)
        .transpose(0, 2, 1, 3, 4)
        .reshape(IMAGE_SIZE, IMAGE_SIZE, c)
    )


def gen_tile_episode(grid: TileGrid, n_context: int, rng: "_RNG" = None
                     ) -> TaskBatch:
    """One-hot tile positions as inputs, n_context random tiles observed.

    Raises
    ------
    ContractError
        if n_context is outside [4, 16]
    """
    low, high = CONTEXT_RANGE
    if not low <= n_context <= high:
        raise ContractError(f"tile context must be within [{low}, {high}], "
                            f"got {n_context}")
    idx = as_generator(rng).choice(N_TILES, size=n_context, replace=False)
    return TaskBatch(np.eye(N_TILES), grid.tiles, idx)


def _draw_episode(grid: TileGrid, gen: np.random.Generator) -> TaskBatch:
    low, high = CONTEXT_RANGE
    return gen_tile_episode(grid, int(gen.integers(low, high + 1)), gen)


class TileTask(TaskABC):
    """Tile completion over an image corpus with a seed-disjoint holdout.

    Synthetic corpora draw holdout images from ``seed + 10**6``. An image
    directory donates its last n_holdout images instead.
    """

    name = "tiles"
    fixed_context = True

    def __init__(self, config) -> None:
        super().__init__(config)
        self.train_images, self.holdout_images = self._corpus()
        self.channels = self.train_images[0].shape[2]
        self._train_grids = [image_to_tiles(i) for i in self.train_images]

        gen = np.random.default_rng(config.seed + HOLDOUT_OFFSET)
        self._holdout = [_draw_episode(image_to_tiles(i), gen)
                         for i in self.holdout_images]
        log.info(f"tile corpus: {len(self.train_images)} training and "
                 f"{len(self.holdout_images)} holdout images")

    def _corpus(self) -> Tuple["_IMAGES", "_IMAGES"]:
        c = self.config
        if not c.image_dir:
            return (synth_images(c.n_images, c.image_kind, c.channels, c.seed),
                    synth_images(c.n_holdout, c.image_kind, c.channels,
                                 c.seed + HOLDOUT_OFFSET))

        images = ingest_image_dir(c.image_dir, c.limit, c.channels)
        if len(images) <= c.n_holdout:
            raise ConfigError("n_holdout", f"{c.image_dir} holds only "
                                           f"{len(images)} images, need more "
                                           f"than {c.n_holdout}")
        return images[:-c.n_holdout], images[-c.n_holdout:]

    @property
    def d_x(self) -> int:
        return N_TILES

    @property
    def d_y(self) -> int:
        return TILE_SIZE ** 2 * self.channels

    def episode(self, rng: "_RNG") -> TaskBatch:
        gen = as_generator(rng)
        grid = self._train_grids[gen.integers(len(self._train_grids))]
        return _draw_episode(grid, gen)

    def reconstruct(self, params: "ModelParams", batch: TaskBatch
                    ) -> np.ndarray:
        """Predicted (64, d_y) tiles of the whole image."""
        return predict(params, batch.x_context, batch.y_context,
                       batch.x_target).numpy()

    def _swd(self, params: "ModelParams", batch: TaskBatch, seed: int
             ) -> float:
        return sliced_wasserstein_report(
            self.reconstruct(params, batch), batch.y_target,
            n_proj=self.config.n_proj, p=self.config.p, seed=seed
        )

    def evaluate(self, params: "ModelParams") -> Dict[str, float]:
        """Mean per-image reconstruction distance over the holdout images."""
        base = self.config.seed + HOLDOUT_OFFSET
        scores = [self._swd(params, b, base + i)
                  for i, b in enumerate(self._holdout)]
        return {"metric": float(np.mean(scores))}

    def eval_table(self, params: "ModelParams", n: int, rng: "_RNG"
                   ) -> Tuple[List[str], np.ndarray]:
        """Per-image reconstruction distance on n fresh synthetic images."""
        gen = as_generator(rng)
        seed = int(gen.integers(2 ** 31))
        images = synth_images(n, self.config.image_kind, self.channels, seed)
        rows = [(i, self._swd(params, _draw_episode(image_to_tiles(img), gen),
                              seed + i))
                for i, img in enumerate(images)]
        return ["image", "swd"], np.array(rows, dtype=np.float64)

    def write_artifacts(self, params: "ModelParams", output_dir: "_PATH"
                        ) -> List[Path]:
        """Per-image scores plus truth, observed and reconstructed dumps."""
        output_dir = Path(output_dir)
        base = self.config.seed + HOLDOUT_OFFSET
        scores = np.array([(i, self._swd(params, b, base + i))
                           for i, b in enumerate(self._holdout)])
        table = output_dir / "reconstruction.csv"
        np.savetxt(table, scores, fmt=["%d", "%.10g"], delimiter=",",
                   header="image,swd", comments="")
        written = [table]

        tiles_dir = output_dir / "tiles"
        tiles_dir.mkdir(exist_ok=True)
        for i, batch in enumerate(self._holdout[:N_DUMPS]):
            observed = np.zeros_like(batch.y_target)
            observed[batch.context_idx] = batch.y_context
            dumps = {
                "truth": batch.y_target,
                "observed": observed,
                "reconstruction": self.reconstruct(params, batch),
            }
            for label, tiles in dumps.items():
                image = tiles_to_image(TileGrid(tiles, self.channels))
                suffix = "pgm" if self.channels == 1 else "ppm"
                written.append(write_pgm(
                    tiles_dir / f"holdout{i:02d}_{label}.{suffix}", image
                ))
        return written
