"""Field dumps, Schlieren images and convergence tables on disk."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SCHLIEREN_K = 15.0


@dataclass
class FieldDump:
    U: np.ndarray
    h: tuple
    t: float
    gamma: float
    model: str


def write_field(path, U: np.ndarray, h, t: float, gamma: float, model: str) -> Path:
    """Plain-text header lines, then one block of row-major values per component."""
    path = Path(path)
    U = np.asarray(U, dtype=float)
    hs = tuple(float(x) for x in np.atleast_1d(h))
    dims = U.shape[1:]
    with path.open("w") as f:
        f.write(f"model {model}\n")
        f.write(f"components {U.shape[0]}\n")
        f.write("dims " + " ".join(str(n) for n in dims) + "\n")
        f.write("h " + " ".join(repr(x) for x in hs) + "\n")
        f.write(f"t {t!r}\n")
        f.write(f"gamma {gamma!r}\n")
        for k, comp in enumerate(U):
            f.write(f"component {k}\n")
            rows = comp.reshape(-1, dims[-1]) if comp.ndim > 1 else comp.reshape(1, -1)
            np.savetxt(f, rows, fmt="%.17g")
    return path


def read_field(path) -> FieldDump:
    lines = Path(path).read_text().splitlines()
    header = {}
    i = 0
    while i < len(lines) and not lines[i].startswith("component "):
        key, _, rest = lines[i].partition(" ")
        header[key] = rest.split()
        i += 1
    try:
        m = int(header["components"][0])
        dims = tuple(int(n) for n in header["dims"])
        hs = tuple(float(x) for x in header["h"])
        t = float(header["t"][0])
        gamma = float(header["gamma"][0])
        model = header["model"][0]
    except (KeyError, IndexError, ValueError) as e:
        raise ValueError(f"{path}: malformed field header ({e})") from None
    values = []
    for line in lines[i:]:
        if line.startswith("component "):
            continue
        values.extend(float(v) for v in line.split())
    size = m * math.prod(dims)
    if len(values) != size:
        raise ValueError(f"{path}: expected {size} values, found {len(values)}")
    U = np.array(values).reshape((m,) + dims)
    return FieldDump(U=U, h=hs, t=t, gamma=gamma, model=model)


def schlieren(rho: np.ndarray, hx: float, hy: float, k: float = SCHLIEREN_K) -> np.ndarray:
    """Intensity ``exp(-k |grad rho| / max |grad rho|)`` in [0, 1]; dark marks steep gradients."""
    rho = np.asarray(rho, dtype=float)
    gx, gy = np.gradient(rho, hx, hy)
    mag = np.hypot(gx, gy)
    top = mag.max()
    if top == 0:
        return np.ones_like(rho)
    return np.exp(-k * mag / top)


def write_pgm(path, image: np.ndarray) -> Path:
    """Binary 8-bit P5 image; ``image[i, j]`` is x-index i, y-index j, drawn with y upward."""
    path = Path(path)
    img = np.asarray(image, dtype=float)
    pixels = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    pixels = pixels.T[::-1]
    height, width = pixels.shape
    with path.open("wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        f.write(pixels.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos].decode("ascii"))
    if tokens[0] != "P5":
        raise ValueError(f"{path}: not a binary PGM")
    width, height = int(tokens[1]), int(tokens[2])
    pixels = np.frombuffer(data[pos + 1:pos + 1 + width * height], dtype=np.uint8)
    return pixels.reshape(height, width)


def convergence_rows(Ns, l1, linf) -> list[dict]:
    """Rows with observed orders ``log2(e_prev / e)``; the first row has none."""
    rows = []
    for k, (n, a, b) in enumerate(zip(Ns, l1, linf)):
        row = {"N": int(n), "L1": float(a), "L1_order": None, "Linf": float(b), "Linf_order": None}
        if k:
            row["L1_order"] = observed_order(l1[k - 1], a, Ns[k - 1], n)
            row["Linf_order"] = observed_order(linf[k - 1], b, Ns[k - 1], n)
        rows.append(row)
    return rows


def observed_order(e_coarse: float, e_fine: float, n_coarse: int = 1, n_fine: int = 2) -> float:
    ratio = n_fine / n_coarse
    if e_fine <= 0 or e_coarse <= 0:
        return math.nan
    return math.log(e_coarse / e_fine) / math.log(ratio)


CONVERGENCE_FIELDS = ("N", "L1", "L1_order", "Linf", "Linf_order")


def write_convergence_csv(path, rows: list[dict]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CONVERGENCE_FIELDS)
        for row in rows:
            w.writerow([_cell(row[k]) for k in CONVERGENCE_FIELDS])
    return path


def read_convergence_csv(path) -> list[dict]:
    with Path(path).open(newline="") as f:
        out = []
        for rec in csv.DictReader(f):
            out.append({k: (int(v) if k == "N" else (float(v) if v != "" else None)) for k, v in rec.items()})
        return out


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path
