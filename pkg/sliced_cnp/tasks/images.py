"""Image corpus: procedural synthetic images and binary PGM/PPM files.

Only 8-bit binary netpbm formats are understood (P5 gray, P6 color). Every
image is returned as a float64 array of shape (32, 32, channels) with values
in [0, 1].
"""

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Dict, List, Optional

import numpy as np

from ..constants import IMAGE_KINDS, IMAGE_SIZE
from ..exceptions import ContractError, ImageFormatError
from ..utils import ProgressBar

if TYPE_CHECKING:
    from ..typeshed import _IMAGES, _PATH

__all__ = ["synth_images", "ingest_image_dir", "read_pnm", "write_pgm",
           "to_square"]

log = logging.getLogger(__name__)

#: file suffixes considered by :func:`ingest_image_dir`
PNM_SUFFIXES = (".pgm", ".ppm", ".pnm")
#: mixed corpus cycles through all image families
MIXED = "mixed"


def _pixel_grid():
    coords = np.arange(IMAGE_SIZE, dtype=np.float64)
    return np.meshgrid(coords, coords, indexing="ij")


def _gradient(gen: np.random.Generator, channels: int) -> np.ndarray:
    angle = gen.uniform(0, 2 * np.pi)
    rows, cols = _pixel_grid()
    u = cols * np.cos(angle) + rows * np.sin(angle)
    u = (u - u.min()) / (u.max() - u.min())
    weights = gen.uniform(0.5, 1.0, size=channels)
    return u[..., None] * weights


def _blobs(gen: np.random.Generator, channels: int) -> np.ndarray:
    rows, cols = _pixel_grid()
    image = np.zeros((IMAGE_SIZE, IMAGE_SIZE, channels))
    for _ in range(gen.integers(1, 5)):
        r0, c0 = gen.uniform(0, IMAGE_SIZE, size=2)
        width = gen.uniform(2.0, 6.0)
        dist2 = (rows - r0) ** 2 + (cols - c0) ** 2
        bump = np.exp(-dist2 / (2 * width ** 2))
        image += bump[..., None] * gen.uniform(0.5, 1.0, size=channels)
    return image / max(1.0, image.max())


def _stripes(gen: np.random.Generator, channels: int) -> np.ndarray:
    angle = gen.uniform(0, np.pi)
    period = gen.uniform(4.0, 16.0)
    phase = gen.uniform(0, 2 * np.pi)
    rows, cols = _pixel_grid()
    u = cols * np.cos(angle) + rows * np.sin(angle)
    wave = 0.5 + 0.5 * np.sin(2 * np.pi * u / period + phase)
    return wave[..., None] * gen.uniform(0.5, 1.0, size=channels)


_GENERATORS: Dict[str, Callable[[np.random.Generator, int], np.ndarray]] = {
    "gradient": _gradient,
    "blobs": _blobs,
    "stripes": _stripes,
}


def synth_images(n: int, kind: str = MIXED, channels: int = 1,
                 seed: Optional[int] = None) -> "_IMAGES":
    """Procedurally generated 32x32 images with spatial structure.

    Image i is drawn from its own generator seeded with ``seed + i`` so any
    image can be regenerated alone.

    Parameters
    ----------
    n: int
        number of images, at least 1
    kind: str
        one of :data:`~sliced_cnp.constants.IMAGE_KINDS` or ``mixed`` which
        cycles through them
    channels: int
        1 for gray, 3 for color
    seed: Optional[int]
        base seed, fresh entropy when None

    Returns
    -------
    _IMAGES
        list of (32, 32, channels) arrays in [0, 1]
    """
    if n < 1:
        raise ContractError(f"need at least one image, got {n}")
    if kind != MIXED and kind not in IMAGE_KINDS:
        raise ContractError(f"unknown image kind '{kind}', valid: "
                            f"{IMAGE_KINDS + (MIXED, )}")
    if channels not in (1, 3):
        raise ContractError(f"channels must be 1 or 3, got {channels}")
    if seed is None:
        seed = int(np.random.default_rng().integers(2 ** 31))

    images = []
    for i in range(n):
        family = IMAGE_KINDS[i % len(IMAGE_KINDS)] if kind == MIXED else kind
        gen = np.random.default_rng(seed + i)
        images.append(np.clip(_GENERATORS[family](gen, channels), 0.0, 1.0))
    return images


def _read_header(data: bytes):
    tokens: List[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated header")
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates header and raster
    return tokens, pos + 1


def read_pnm(path: "_PATH") -> np.ndarray:
    """Read 8-bit binary PGM (P5) or PPM (P6) file.

    Returns
    -------
    np.ndarray
        (height, width, channels) array scaled to [0, 1]

    Raises
    ------
    ImageFormatError
        if the file is not an 8-bit binary netpbm image or is truncated
    """
    data = Path(path).read_bytes()
    tokens, offset = _read_header(data)
    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise ImageFormatError(f"{path}: unsupported format {magic!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ImageFormatError(f"{path}: malformed header")
    if width < 1 or height < 1 or not 0 < maxval < 256:
        raise ImageFormatError(f"{path}: only 8-bit images are supported")

    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    raster = np.frombuffer(data, dtype=np.uint8, count=-1, offset=offset)
    if raster.size < expected:
        raise ImageFormatError(f"{path}: raster truncated, {raster.size} of "
                               f"{expected} bytes")
    image = raster[:expected].reshape(height, width, channels)
    return image.astype(np.float64) / maxval


def _box_weights(side: int, size: int) -> np.ndarray:
    """(size, side) matrix averaging pixels by their overlap with each bin."""
    edges = np.arange(size + 1) * side / size
    pixels = np.arange(side)
    overlap = (np.minimum(edges[1:, None], pixels[None, :] + 1)
               - np.maximum(edges[:-1, None], pixels[None, :]))
    return np.clip(overlap, 0, None) * size / side


def to_square(image: np.ndarray, size: int = IMAGE_SIZE) -> np.ndarray:
    """Center crop to the largest square and box-average to size x size.

    Bins may cover fractional pixels, those pixels count with the area
    they contribute to the bin.

    Raises
    ------
    ContractError
        if the image is smaller than size in either direction
    """
    height, width = image.shape[:2]
    side = min(height, width)
    if side < size:
        raise ContractError(f"image {height}x{width} is smaller than "
                            f"{size}x{size}")
    top, left = (height - side) // 2, (width - side) // 2
    crop = image[top:top + side, left:left + side]
    weights = _box_weights(side, size)
    return np.einsum("ij,jkc,lk->ilc", weights, crop, weights)


def _convert_channels(image: np.ndarray, channels: int) -> np.ndarray:
    if image.shape[2] == channels:
        return image
    if channels == 1:
        return image.mean(axis=2, keepdims=True)
    return np.repeat(image, channels, axis=2)


def ingest_image_dir(path: "_PATH", limit: Optional[int] = None,
                     channels: Optional[int] = None, quiet: bool = True
                     ) -> "_IMAGES":
    """Load PGM/PPM files from directory as 32x32 images.

    Files are visited in sorted name order. Unreadable files are skipped
    with a warning.

    Parameters
    ----------
    path: _PATH
        directory to scan, not recursive
    limit: Optional[int]
        return at most this many images
    channels: Optional[int]
        convert every image to this many channels, defaults to the channel
        count of the first readable image
    quiet: bool
        hide progress bar

    Returns
    -------
    _IMAGES
        list of (32, 32, channels) arrays in [0, 1]

    Raises
    ------
    FileNotFoundError
        if path is not a directory
    ImageFormatError
        if no file could be read
    """
    path = Path(path).expanduser()
    if not path.is_dir():
        raise FileNotFoundError(f"image directory {path} does not exist")
    if limit is not None and limit < 1:
        raise ContractError(f"limit must be >= 1, got {limit}")

    files = sorted(f for f in path.iterdir()
                   if f.suffix.lower() in PNM_SUFFIXES and f.is_file())
    images: List[np.ndarray] = []
    with ProgressBar(total=len(files), unit="file", desc="Reading images",
                     quiet=quiet) as progress:
        for f in files:
            if limit is not None and len(images) >= limit:
                break
            try:
                image = to_square(read_pnm(f))
            except (ImageFormatError, ContractError, OSError) as e:
                log.warning(f"skipping {f.name}: {e}")
                progress.update_bar()
                continue
            if channels is None:
                channels = image.shape[2]
            images.append(_convert_channels(image, channels))
            progress.update_bar()

    if not images:
        raise ImageFormatError(f"no readable PGM/PPM images in {path}")
    log.info(f"loaded {len(images)} images from {path}")
    return images


def write_pgm(path: "_PATH", image: np.ndarray) -> Path:
    """Write image in [0, 1] as 8-bit P5 (gray) or P6 (color) file."""
    path = Path(path)
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        image = image[..., None]
    height, width, channels = image.shape
    if channels not in (1, 3):
        raise ContractError(f"cannot write {channels} channel image")

    magic = "P5" if channels == 1 else "P6"
    raster = np.round(np.clip(image, 0.0, 1.0) * 255).astype(np.uint8)
    with path.open("wb") as f:
        f.write(f"{magic}\n{width} {height}\n255\n".encode("ascii"))
        f.write(raster.tobytes())
    return path
