"""Plain-text and image exports: CSV matrices, PGM images, key=value metadata."""
from __future__ import annotations

import configparser
from pathlib import Path

import numpy as np

from .geometry import Scene

__all__ = [
    "load_scene",
    "read_complex_matrix_csv",
    "read_csv",
    "read_matrix_csv",
    "read_metadata",
    "read_pgm",
    "save_measurements",
    "save_scene",
    "write_complex_matrix_csv",
    "write_csv",
    "write_matrix_csv",
    "write_metadata",
    "write_pgm",
]


def _fmt(v) -> str:
    return format(float(v), ".17g")


def write_csv(path, rows, header) -> Path:
    """Write a 2-D numeric table with a header row, LF line endings."""
    path = Path(path)
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def read_csv(path):
    """Return ``(header, data)``; a first line that does not parse as numbers is the header."""
    lines = Path(path).read_text().splitlines()
    header = None
    if lines:
        try:
            [float(v) for v in lines[0].split(",")]
        except ValueError:
            header, lines = lines[0].split(","), lines[1:]
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines if ln.strip()])
    return header, data


def write_matrix_csv(path, matrix) -> Path:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    return write_csv(path, matrix, [f"c{j}" for j in range(matrix.shape[1])])


def read_matrix_csv(path) -> np.ndarray:
    return np.atleast_2d(read_csv(path)[1])


def write_complex_matrix_csv(path, matrix) -> Path:
    """Complex matrix as interleaved ``re,im`` column pairs, one CSV row per matrix row."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    pairs = np.empty((matrix.shape[0], 2 * matrix.shape[1]))
    pairs[:, 0::2] = matrix.real
    pairs[:, 1::2] = matrix.imag
    header = [f"{part}_{j}" for j in range(matrix.shape[1]) for part in ("re", "im")]
    return write_csv(path, pairs, header)


def read_complex_matrix_csv(path) -> np.ndarray:
    data = read_matrix_csv(path)
    return data[:, 0::2] + 1j * data[:, 1::2]


def write_pgm(path, matrix, vmax=None) -> Path:
    """8-bit binary PGM (P5) with linear scaling 0 -> black, ``vmax`` -> white.

    ``vmax`` defaults to the matrix maximum; values are clipped to [0, vmax].
    """
    path = Path(path)
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    if vmax is None:
        vmax = float(m.max(initial=0.0))
    scaled = np.zeros(m.shape) if vmax <= 0 else np.clip(m / vmax, 0.0, 1.0)
    img = np.rint(scaled * 255.0).astype(np.uint8)
    rows, cols = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        f.write(img.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos)
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    cols, rows, maxval = (int(v) for v in fields[1:])
    if maxval > 255:
        raise ValueError(f"{path}: only 8-bit PGM is supported")
    pixels = np.frombuffer(data, dtype=np.uint8, count=rows * cols, offset=pos + 1)
    return pixels.reshape(rows, cols)


def write_metadata(path, items) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as f:
        for key, value in items.items():
            if isinstance(value, float):
                value = _fmt(value)
            f.write(f"{key}={value}\n")
    return path


def read_metadata(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".ini")


def save_scene(scene: Scene, path) -> Path:
    """Coefficient CSV plus an ``.ini`` sidecar holding pixel size and origin."""
    path = Path(path)
    write_matrix_csv(path, scene.coefficients)
    cp = configparser.ConfigParser()
    ox, oy, oz = scene.origin
    cp["scene"] = {
        "pixel_size_m": _fmt(scene.pixel_size),
        "origin_x_m": _fmt(ox),
        "origin_y_m": _fmt(oy),
        "origin_z_m": _fmt(oz),
    }
    with open(_sidecar(path), "w", newline="\n") as f:
        cp.write(f)
    return path


def load_scene(path, pixel_size=None, origin=None) -> Scene:
    """Read a scene CSV.  Explicit arguments override the sidecar, if any."""
    path = Path(path)
    coef = read_matrix_csv(path)
    side = _sidecar(path)
    if side.exists():
        cp = configparser.ConfigParser()
        cp.read(side)
        sec = cp["scene"]
        if pixel_size is None:
            pixel_size = sec.getfloat("pixel_size_m")
        if origin is None and "origin_x_m" in sec:
            origin = tuple(sec.getfloat(f"origin_{a}_m") for a in "xyz")
    if pixel_size is None:
        raise ValueError(f"{path}: pixel size not given and no sidecar found")
    return Scene(coef, pixel_size, origin)


def save_measurements(ms, directory, prefix="measurement") -> list[Path]:
    """Export E (re,im CSV), the received vector and a metadata file."""
    directory = Path(directory)
    e_path = write_complex_matrix_csv(directory / f"{prefix}_E.csv", ms.field_matrix)
    r_path = write_csv(
        directory / f"{prefix}_R.csv",
        np.column_stack([ms.received.real, ms.received.imag]),
        ["re", "im"],
    )
    t = ms.detection_times
    meta = {
        "N": ms.n_detections,
        "rows": ms.grid_shape[0],
        "cols": ms.grid_shape[1],
        "rho": ms.rho,
        "snr_db": "none" if ms.snr_db is None else ms.snr_db,
        "seed": ms.seed,
        "noise_seed": "none" if ms.noise_seed is None else ms.noise_seed,
        "first_detection_s": float(t[0]),
        "detection_interval_s": float(t[1] - t[0]) if t.size > 1 else 0.0,
    }
    m_path = write_metadata(directory / f"{prefix}_meta.txt", meta)
    return [e_path, r_path, m_path]
