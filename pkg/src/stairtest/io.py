"""Sample files, plot-data export and JSON helpers.

Sample file layout::

    #space n=6 c=6
    0 3 5 1 0 2
    ...

one sample per line, ``n`` space-separated categories in ``[0, c)``.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InputError
from .space import CategoricalSpace, SparseSampleSet, decode_many, empirical_pmf, encode_many, \
    tv_distance_sparse
from .stair import RegionUniform, StairDistribution

_HEADER = re.compile(r"^#space\s+n=(\d+)\s+c=(\d+)\s*$")


def format_header(space: CategoricalSpace) -> str:
    return f"#space n={space.n} c={space.c}"


def write_samples(path, space: CategoricalSpace, indices) -> Path:
    path = Path(path)
    rows = decode_many(np.asarray(indices, dtype=np.int64), space)
    lines = [format_header(space)] + [" ".join(map(str, row)) for row in rows.tolist()]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
    except OSError as e:
        raise InputError(f"cannot write {path}: {e}") from e
    return path


def read_sample_indices(path, space: Optional[CategoricalSpace] = None):
    """Parse a sample file; returns ``(space, indices in file order)``.

    The header is mandatory and must match ``space`` when one is given.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise InputError(f"cannot read sample file {path}: {e}") from e
    lines = text.splitlines()
    match = _HEADER.match(lines[0]) if lines else None
    if match is None:
        raise InputError(f"{path}: first line must be '#space n=<n> c=<c>'")
    found = CategoricalSpace(int(match.group(1)), int(match.group(2)))
    if space is not None and found != space:
        raise InputError(f"{path}: header says n={found.n} c={found.c}, "
                         f"expected n={space.n} c={space.c}")
    body = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("#")]
    if not body:
        return found, np.empty(0, dtype=np.int64)
    try:
        rows = np.array([ln.split() for ln in body], dtype=np.int64)
    except ValueError as e:
        raise InputError(f"{path}: every line needs exactly {found.n} integers") from e
    if rows.ndim != 2 or rows.shape[1] != found.n:
        raise InputError(f"{path}: every line needs exactly {found.n} integers")
    try:
        return found, encode_many(rows, found)
    except InputError as e:
        raise InputError(f"{path}: {e}") from e


def read_samples(path, space: Optional[CategoricalSpace] = None) -> SparseSampleSet:
    found, indices = read_sample_indices(path, space)
    return SparseSampleSet.from_indices(found, indices)


def generate_dataset(dist: RegionUniform, m: int, seed, path) -> Path:
    """Sample ``m`` elements from ``dist`` and write them as a sample file."""
    return write_samples(path, dist.space, dist.sample_indices(m, seed))


def export_empirical_pmf(p: StairDistribution, samples: SparseSampleSet, path) -> float:
    """Write per-element plot data, region by region, most over-estimated first.

    Rows are ``region_id, sort_rank, index, count, p_x, q_x``; each region
    ends with one aggregate row (empty ``index``, ``count`` = number of
    unsampled elements) when it has unsampled elements. The first line is a
    comment carrying the full-space empirical TV, which is also returned.
    """
    q_hat = empirical_pmf(samples)
    dtv = tv_distance_sparse(p, q_hat)
    px = p.pmf(q_hat.indices)
    region = p.region_of(q_hat.indices)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# d_tv={dtv!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["region_id", "sort_rank", "index", "count", "p_x", "q_x"])
        for i, reg in enumerate(p.regions):
            inside = np.flatnonzero(region == i)
            # Stable sort on -diff keeps ties in ascending index order.
            order = inside[np.argsort(-(q_hat.probs[inside] - px[inside]), kind="stable")]
            for rank, j in enumerate(order):
                w.writerow([reg.id, rank, int(q_hat.indices[j]), 1, repr(float(px[j])),
                            repr(float(q_hat.probs[j]))])
            rest = reg.size - inside.size
            if rest:
                w.writerow([reg.id, order.size, "", rest, repr(reg.per_element_prob), repr(0.0)])
    return dtv


def dump_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")
    return path


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from e
