"""On-disk formats: VOXL voxel grids, VOXB style bases, PGM silhouettes, and
line-oriented JSON manifests.

All formats are ASCII-first (PGM also has its standard binary raster) so
artifacts stay diffable.  Values are written x-fastest, matching the flat
vector layout used by the rest of the package; PGM rasters are row-major
top-to-bottom with row = y, column = x, which coincides with the same
x-fastest order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .projection import Silhouette
from .shape import StyleBasis, VoxelGrid


# ---------------------------------------------------------------------------
# VOXL: voxel grids


def write_voxl(path, grid: VoxelGrid) -> None:
    """Write a grid: header lines ``voxl 1``, ``dim Q``, ``data float|binary``,
    a blank line, then Q^3 whitespace-separated values in x-fastest order."""
    flat = grid.flat()
    lines = ["voxl 1", f"dim {grid.q}", f"data {'binary' if grid.binary else 'float'}", ""]
    if grid.binary:
        fmt = lambda v: "1" if v == 1.0 else "0"
    else:
        fmt = lambda v: f"{v:.9g}"
    for start in range(0, flat.size, grid.q):
        lines.append(" ".join(fmt(v) for v in flat[start : start + grid.q]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_voxl(path) -> VoxelGrid:
    text = Path(path).read_text(encoding="ascii")
    lines = text.splitlines()
    if len(lines) < 4:
        raise ValueError(f"{path}: truncated VOXL header")
    if lines[0].split() != ["voxl", "1"]:
        raise ValueError(f"{path}: bad magic line {lines[0]!r}")
    dim_tokens = lines[1].split()
    if len(dim_tokens) != 2 or dim_tokens[0] != "dim" or not dim_tokens[1].isdigit():
        raise ValueError(f"{path}: bad dim line {lines[1]!r}")
    q = int(dim_tokens[1])
    if q <= 0:
        raise ValueError(f"{path}: non-positive dim {q}")
    data_tokens = lines[2].split()
    if len(data_tokens) != 2 or data_tokens[0] != "data" or data_tokens[1] not in ("float", "binary"):
        raise ValueError(f"{path}: bad data line {lines[2]!r}")
    binary = data_tokens[1] == "binary"
    if lines[3].strip():
        raise ValueError(f"{path}: expected blank line after header")
    tokens = "\n".join(lines[4:]).split()
    if len(tokens) != q**3:
        raise ValueError(f"{path}: expected {q**3} values, got {len(tokens)}")
    try:
        flat = np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric voxel value") from exc
    if flat.min() < 0.0 or flat.max() > 1.0:
        raise ValueError(f"{path}: voxel values outside [0, 1]")
    return VoxelGrid.from_flat(flat, q, binary=binary)


# ---------------------------------------------------------------------------
# PGM: silhouettes


def write_pgm(path, sil: Silhouette, fmt: str = "P5") -> None:
    """Write a silhouette as PGM with maxval 255; pixel = round(255 * value).

    ``fmt`` selects the ASCII (``P2``) or binary (``P5``) encoding; both
    decode identically."""
    if fmt not in ("P2", "P5"):
        raise ValueError(f"unsupported PGM format {fmt!r}")
    q = sil.q
    # row-major top-to-bottom: row y, column x
    pixels = np.rint(255.0 * sil.values.T).astype(np.uint8)
    header = f"{fmt}\n{q} {q}\n255\n"
    if fmt == "P5":
        Path(path).write_bytes(header.encode("ascii") + pixels.tobytes())
    else:
        body = "\n".join(" ".join(str(v) for v in row) for row in pixels)
        Path(path).write_text(header + body + "\n", encoding="ascii")


def _pgm_header_tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping '#' comments, and
    finally the offset just past the consumed header."""
    i = 0
    tokens = []
    while len(tokens) < 4 and i < len(data):
        ch = data[i : i + 1]
        if ch == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
        elif ch.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
                j += 1
            tokens.append(data[i:j])
            i = j
    if len(tokens) < 4:
        raise ValueError("truncated PGM header")
    # single whitespace byte separates maxval from the raster
    return tokens, i + 1


def read_pgm(path) -> Silhouette:
    data = Path(path).read_bytes()
    tokens, offset = _pgm_header_tokens(data)
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: unsupported PGM magic {magic!r}")
    try:
        width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed PGM header") from exc
    if width != height:
        raise ValueError(f"{path}: silhouettes must be square, got {width}x{height}")
    if not 1 <= maxval <= 255:
        raise ValueError(f"{path}: maxval {maxval} outside [1, 255]")
    n = width * height
    if magic == b"P5":
        raster = data[offset:]
        if len(raster) != n:
            raise ValueError(f"{path}: expected {n} raster bytes, got {len(raster)}")
        pixels = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    else:
        fields = data[offset - 1 :].split()
        if len(fields) != n:
            raise ValueError(f"{path}: expected {n} pixel values, got {len(fields)}")
        pixels = np.array([float(int(f)) for f in fields])
    if pixels.max() > maxval:
        raise ValueError(f"{path}: pixel value exceeds maxval {maxval}")
    rows = pixels.reshape((height, width)) / maxval
    return Silhouette(values=rows.T)


# ---------------------------------------------------------------------------
# VOXB: style bases


def write_basis(path, basis: StyleBasis) -> None:
    """Write a basis: header ``voxb 1``, ``dim Q``, ``m M``, a blank line,
    then the mean (Q^3 values) followed by each basis column (Q^3 values
    each).  Floats carry full precision so orthonormality survives the
    round-trip; singular values are diagnostics and are not persisted."""
    q = basis.q
    lines = ["voxb 1", f"dim {q}", f"m {basis.m}", ""]
    per_line = max(q, 1)

    def emit(vec):
        for start in range(0, vec.size, per_line):
            lines.append(" ".join(f"{v:.17g}" for v in vec[start : start + per_line]))

    emit(basis.mu)
    for j in range(basis.m):
        emit(basis.basis[:, j])
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_basis(path) -> StyleBasis:
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if len(lines) < 4:
        raise ValueError(f"{path}: truncated VOXB header")
    if lines[0].split() != ["voxb", "1"]:
        raise ValueError(f"{path}: bad magic line {lines[0]!r}")
    dim_tokens = lines[1].split()
    if len(dim_tokens) != 2 or dim_tokens[0] != "dim" or not dim_tokens[1].isdigit():
        raise ValueError(f"{path}: bad dim line {lines[1]!r}")
    q = int(dim_tokens[1])
    m_tokens = lines[2].split()
    if len(m_tokens) != 2 or m_tokens[0] != "m" or not m_tokens[1].isdigit():
        raise ValueError(f"{path}: bad m line {lines[2]!r}")
    m = int(m_tokens[1])
    if lines[3].strip():
        raise ValueError(f"{path}: expected blank line after header")
    tokens = "\n".join(lines[4:]).split()
    n = q**3
    expected = n * (1 + m)
    if len(tokens) != expected:
        raise ValueError(f"{path}: expected {expected} values ({1 + m} blocks of {n}), got {len(tokens)}")
    values = np.array([float(t) for t in tokens])
    mu = values[:n]
    basis = values[n:].reshape((m, n)).T if m > 0 else np.zeros((n, 0))
    return StyleBasis(q=q, mu=mu, basis=basis, singular_values=np.zeros(m))


# ---------------------------------------------------------------------------
# Manifests: line-oriented JSON


@dataclass(frozen=True, eq=False)
class ManifestEntry:
    id: str
    silhouette_path: Path
    gt_grid_path: Path | None = None
    gt_pose: np.ndarray | None = None
    gt_style: np.ndarray | None = None


def load_manifest(path) -> list[ManifestEntry]:
    """Parse a manifest: one JSON object per line with fields ``id``,
    ``silhouette_path`` and optional ``gt_grid_path``, ``gt_pose`` (5 reals),
    ``gt_style``.  Relative paths resolve against the manifest's directory;
    ids must be unique and referenced files must exist."""
    base = Path(path).parent
    entries = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON") from exc
            if not isinstance(obj, dict) or "id" not in obj or "silhouette_path" not in obj:
                raise ValueError(f"{path}:{lineno}: entry needs 'id' and 'silhouette_path'")
            entry_id = str(obj["id"])
            if entry_id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate id {entry_id!r}")
            seen.add(entry_id)

            def resolve(p):
                p = Path(p)
                return p if p.is_absolute() else base / p

            sil_path = resolve(obj["silhouette_path"])
            if not sil_path.exists():
                raise ValueError(f"{path}:{lineno}: missing file {sil_path}")
            grid_path = None
            if obj.get("gt_grid_path") is not None:
                grid_path = resolve(obj["gt_grid_path"])
                if not grid_path.exists():
                    raise ValueError(f"{path}:{lineno}: missing file {grid_path}")
            pose = None
            if obj.get("gt_pose") is not None:
                pose = np.asarray(obj["gt_pose"], dtype=np.float64)
                if pose.shape != (5,):
                    raise ValueError(f"{path}:{lineno}: gt_pose must hold 5 reals")
            style = None
            if obj.get("gt_style") is not None:
                style = np.asarray(obj["gt_style"], dtype=np.float64)
            entries.append(
                ManifestEntry(
                    id=entry_id,
                    silhouette_path=sil_path,
                    gt_grid_path=grid_path,
                    gt_pose=pose,
                    gt_style=style,
                )
            )
    return entries
