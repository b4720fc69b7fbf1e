"""Field import/export: PGM images (P2/P5) and CSV tables.

PGM stores integers 0..maxval; fields are mapped linearly onto a declared
value range [lo, hi] (the range travels alongside the file, e.g. in a report
JSON, since PGM itself cannot carry it).  Image rows run top to bottom and
are written with y decreasing, so the first raster row is the top edge of
the domain.  CSV rows are ``x,y,channel,value`` at cell centers.
"""

from __future__ import annotations

import io
import os

import numpy as np

from .grids import Field, Grid2, Mask

__all__ = [
    "write_pgm",
    "read_pgm",
    "field_from_pgm",
    "mask_from_pgm",
    "field_to_csv",
    "field_from_csv",
]


def write_pgm(path: str | os.PathLike, u: Field, lo: float, hi: float,
              maxval: int = 65535, binary: bool = True) -> None:
    """Quantize a scalar field onto [lo, hi] and write P5 (or P2) PGM."""
    if u.channels != 1:
        raise ValueError("PGM export is for scalar fields")
    if maxval not in (255, 65535):
        raise ValueError("maxval must be 255 or 65535")
    if not (hi > lo):
        raise ValueError("declared range must have hi > lo")
    v = u.values[:, :, 0]
    scaled = np.clip(np.rint((v - lo) / (hi - lo) * maxval), 0, maxval)
    # raster: rows top to bottom = y decreasing; columns = x increasing
    raster = scaled.T[::-1, :].astype(np.uint16 if maxval > 255 else np.uint8)
    header = f"P5\n{u.grid.nx} {u.grid.ny}\n{maxval}\n" if binary \
        else f"P2\n{u.grid.nx} {u.grid.ny}\n{maxval}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        if binary:
            if maxval > 255:
                fh.write(raster.astype(">u2").tobytes())
            else:
                fh.write(raster.tobytes())
        else:
            body = "\n".join(" ".join(str(int(x)) for x in row)
                             for row in raster)
            fh.write(body.encode("ascii"))
            fh.write(b"\n")


def _read_tokens(fh: io.BufferedReader, count: int) -> list[bytes]:
    """Read whitespace-separated header tokens, honoring '#' comments."""
    tokens: list[bytes] = []
    while len(tokens) < count:
        ch = fh.read(1)
        if not ch:
            raise ValueError("truncated PGM header")
        if ch == b"#":
            while ch not in (b"\n", b""):
                ch = fh.read(1)
            continue
        if ch.isspace():
            continue
        tok = ch
        while True:
            ch = fh.read(1)
            if not ch or ch.isspace():
                break
            if ch == b"#":
                while ch not in (b"\n", b""):
                    ch = fh.read(1)
                break
            tok += ch
        tokens.append(tok)
    return tokens


def read_pgm(path: str | os.PathLike) -> tuple[np.ndarray, int]:
    """Read P2/P5; returns (ints as (width, height) with y up, maxval)."""
    with open(path, "rb") as fh:
        magic = fh.read(2)
        if magic not in (b"P2", b"P5"):
            raise ValueError("not a P2/P5 PGM file")
        w, h, maxval = (int(t) for t in _read_tokens(fh, 3))
        if w < 1 or h < 1 or not (0 < maxval <= 65535):
            raise ValueError("invalid PGM dimensions or maxval")
        if magic == b"P5":
            dtype = ">u2" if maxval > 255 else np.uint8
            count = w * h
            raw = np.frombuffer(fh.read(), dtype=dtype, count=count)
            raster = raw.reshape(h, w).astype(np.int64)
        else:
            data = fh.read().split()
            if len(data) < w * h:
                raise ValueError("truncated P2 body")
            raster = np.array([int(t) for t in data[: w * h]],
                              dtype=np.int64).reshape(h, w)
        if raster.max(initial=0) > maxval:
            raise ValueError("PGM sample exceeds declared maxval")
    # undo the top-to-bottom raster: values[i, j] with y increasing
    return raster[::-1, :].T.copy(), maxval


def field_from_pgm(path: str | os.PathLike, h: float, lo: float,
                   hi: float) -> Field:
    """Read a PGM and map its integers linearly onto [lo, hi]."""
    if not (hi > lo):
        raise ValueError("declared range must have hi > lo")
    ints, maxval = read_pgm(path)
    values = lo + ints.astype(float) / maxval * (hi - lo)
    grid = Grid2(ints.shape[0], ints.shape[1], h)
    return Field(grid, values[:, :, None])


def mask_from_pgm(path: str | os.PathLike, h: float) -> Mask:
    """Nonzero samples mark mask membership."""
    ints, _ = read_pgm(path)
    grid = Grid2(ints.shape[0], ints.shape[1], h)
    return Mask(grid, ints > 0)


def field_to_csv(path: str | os.PathLike, u: Field) -> None:
    xs = [float(x) for x in u.grid.xs()]
    ys = [float(y) for y in u.grid.ys()]
    with open(path, "w", newline="\n") as fh:
        fh.write("x,y,channel,value\n")
        for i in range(u.grid.nx):
            for j in range(u.grid.ny):
                for c in range(u.channels):
                    v = float(u.values[i, j, c])
                    fh.write(f"{xs[i]!r},{ys[j]!r},{c},{v!r}\n")


def field_from_csv(path: str | os.PathLike) -> Field:
    xs: list[float] = []
    ys: list[float] = []
    rows: list[tuple[float, float, int, float]] = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "x,y,channel,value":
            raise ValueError("unexpected CSV header")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            sx, sy, sc, sv = line.split(",")
            rows.append((float(sx), float(sy), int(sc), float(sv)))
    if not rows:
        raise ValueError("empty CSV field")
    xs = sorted({r[0] for r in rows})
    ys = sorted({r[1] for r in rows})
    channels = max(r[2] for r in rows) + 1
    h = 2.0 * xs[0]
    grid = Grid2(len(xs), len(ys), h)
    ix = {x: i for i, x in enumerate(xs)}
    iy = {y: j for j, y in enumerate(ys)}
    values = np.zeros((grid.nx, grid.ny, channels))
    for x, y, c, v in rows:
        values[ix[x], iy[y], c] = v
    return Field(grid, values)
