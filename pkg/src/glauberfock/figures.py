"""PNG renderings of intensity and correlation maps.

These are plain colour-mapped rasters written next to the CSV output, one
pixel per site (or z sample), with no axes or annotations.
"""

from __future__ import annotations

import io as _io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import atomic_write  # noqa: E402

DEFAULT_CMAP = "inferno"


def png_bytes(values, scale="global", gamma=1.0, cmap=DEFAULT_CMAP, upscale=4) -> bytes:
    x = np.clip(np.atleast_2d(np.asarray(values, dtype=float)), 0.0, None)
    peak = x.max(axis=1, keepdims=True) if scale == "row" else x.max()
    with np.errstate(invalid="ignore", divide="ignore"):
        norm = np.where(peak > 0, x / peak, 0.0)
    if gamma != 1.0:
        norm = norm ** (1.0 / gamma)
    if upscale > 1:
        norm = np.kron(norm, np.ones((upscale, upscale)))
    buf = _io.BytesIO()
    # strip the software/date text chunks so reruns are byte-identical
    plt.imsave(buf, norm, cmap=cmap, vmin=0.0, vmax=1.0, origin="upper", format="png", metadata={"Software": None})
    return buf.getvalue()


def write_png(path, values, scale="global", gamma=1.0, cmap=DEFAULT_CMAP):
    return atomic_write(path, png_bytes(values, scale=scale, gamma=gamma, cmap=cmap))
