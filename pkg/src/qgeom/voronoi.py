"""Sampled Voronoi labelings of quantum states under the distances of :mod:`qgeom.distances`.

Labelings assign every sample to its nearest (or farthest) site. Samples
whose best and second-best distances differ by less than ``eps_band`` are
flagged as boundary samples and excluded from agreement verdicts.

Divergence cells with pure sites (or pure queries for the dual) are defined
as a limit: the singular argument is mixed with the maximally mixed state
at radius ``r`` for each ``r`` in an increasing sequence approaching 1, and
a label is kept only if it is the same for every ``r``.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from qgeom import linalg
from qgeom.distances import DistanceKind, distance_matrix, stack
from qgeom.errors import DimensionMismatch, LengthMismatch, RangeError
from qgeom.states import (
    PURE_TOL,
    BlochVector,
    DensityMatrix,
    bloch_coordinates,
    bloch_matrix,
    purity,
    random_pure_matrices,
    shrink_toward_center,
    xi_values,
)

DEFAULT_R_SEQUENCE = (0.99, 0.999, 0.9999)
DEFAULT_BAND = 1e-7
DISTINCT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SiteSet:
    sites: tuple[DensityMatrix, ...]

    def __init__(self, sites: Iterable[DensityMatrix]):
        sites = tuple(sites)
        if len(sites) < 2:
            raise ValueError("a site set needs at least two sites")
        dims = {s.dim for s in sites}
        if len(dims) != 1:
            raise DimensionMismatch(f"sites of mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "sites", sites)
        for i in range(len(sites)):
            for j in range(i + 1, len(sites)):
                if trace_distance(sites[i], sites[j]) <= DISTINCT_TOL:
                    raise ValueError(f"sites {i} and {j} coincide")

    @property
    def dim(self) -> int:
        return self.sites[0].dim

    @property
    def pure_flags(self) -> tuple[bool, ...]:
        return tuple(purity(s) >= 1.0 - PURE_TOL for s in self.sites)

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __getitem__(self, i):
        return self.sites[i]


@dataclass(frozen=True, eq=False)
class Labeling:
    """Per-sample site index (0-based), margin and boundary flag."""

    assignments: np.ndarray
    margins: np.ndarray
    boundary_mask: np.ndarray
    kind: DistanceKind
    variant: str = "nearest"
    band: float = DEFAULT_BAND
    stable: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.assignments)


@dataclass(frozen=True)
class AgreementReport:
    compared: int
    mismatches: int
    mismatch_indices: tuple[int, ...]
    band: float
    labels: tuple[str, str] = ("", "")

    @property
    def agree(self) -> bool:
        return self.mismatches == 0

    def to_dict(self) -> dict:
        return {
            "compared": self.compared,
            "mismatches": self.mismatches,
            "mismatch_indices": list(self.mismatch_indices),
            "band": self.band,
        }


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    w, _ = linalg.eigh_batch((a.matrix - b.matrix)[None])
    return 0.5 * float(np.abs(w).sum())


# --- ranking -------------------------------------------------------------------

def _rank(dist: np.ndarray, variant: str) -> tuple[np.ndarray, np.ndarray]:
    if variant == "nearest":
        key = dist
    elif variant == "farthest":
        key = -dist
    else:
        raise ValueError(f"variant must be 'nearest' or 'farthest', got {variant!r}")
    idx = np.argmin(key, axis=1)
    part = np.sort(key, axis=1)
    margin = part[:, 1] - part[:, 0] if key.shape[1] > 1 else np.full(len(key), np.inf)
    return idx, margin


def _needs_site_limit(kind: DistanceKind, sites: Sequence[DensityMatrix]) -> bool:
    return kind is DistanceKind.DIVERGENCE and any(not s.is_full_rank() for s in sites)


def _needs_query_limit(kind: DistanceKind, samples: Sequence[DensityMatrix]) -> bool:
    return kind is DistanceKind.DIVERGENCE_DUAL and any(not q.is_full_rank() for q in samples)


def _distance_stack(samples, sites, kind, r_sequence) -> list[np.ndarray]:
    """One distance matrix per radius when a pure-state limit is needed, else one."""
    if _needs_site_limit(kind, sites):
        return [
            distance_matrix(samples, [shrink_toward_center(s, r) for s in sites], kind)
            for r in r_sequence
        ]
    if _needs_query_limit(kind, samples):
        out = []
        for r in r_sequence:
            shrunk = [q if q.is_full_rank() else shrink_toward_center(q, r) for q in samples]
            out.append(distance_matrix(shrunk, sites, kind))
        return out
    return [distance_matrix(samples, sites, kind)]


def _check_r_sequence(r_sequence: Sequence[float]) -> tuple[float, ...]:
    r = tuple(float(v) for v in r_sequence)
    if not r or any(not 0.0 < v < 1.0 for v in r) or any(b <= a for a, b in zip(r, r[1:])):
        raise RangeError(f"r_sequence must be increasing values in (0, 1), got {r}")
    return r


def label_samples(
    samples: Sequence[DensityMatrix],
    sites: SiteSet | Sequence[DensityMatrix],
    kind: DistanceKind | str,
    variant: str = "nearest",
    eps_band: float = DEFAULT_BAND,
    r_sequence: Sequence[float] = DEFAULT_R_SEQUENCE,
) -> Labeling:
    kind = kind if isinstance(kind, DistanceKind) else DistanceKind.parse(kind)
    sites = list(sites)
    samples = list(samples)
    if not samples:
        empty = np.empty(0)
        return Labeling(empty.astype(int), empty, empty.astype(bool), kind, variant, eps_band, empty.astype(bool))
    r_sequence = _check_r_sequence(r_sequence)
    mats = _distance_stack(samples, sites, kind, r_sequence)
    ranked = [_rank(m, variant) for m in mats]
    idx, margin = ranked[-1]
    stable = np.ones(len(samples), dtype=bool)
    for other, _ in ranked[:-1]:
        stable &= other == idx
    boundary = (margin < eps_band) | ~stable
    return Labeling(idx, margin, boundary, kind, variant, eps_band, stable)


def nearest_site(query, sites, kind, r_sequence=DEFAULT_R_SEQUENCE) -> tuple[int, float]:
    lab = label_samples([query], sites, kind, "nearest", r_sequence=r_sequence)
    return int(lab.assignments[0]), float(lab.margins[0])


def farthest_site(query, sites, kind, r_sequence=DEFAULT_R_SEQUENCE) -> tuple[int, float]:
    lab = label_samples([query], sites, kind, "farthest", r_sequence=r_sequence)
    return int(lab.assignments[0]), float(lab.margins[0])


def divergence_label_pure_limit(
    query: DensityMatrix,
    sites: SiteSet | Sequence[DensityMatrix],
    r_sequence: Sequence[float] = DEFAULT_R_SEQUENCE,
) -> tuple[int, bool]:
    """Nearest site under ``D(query || r site + (1-r) I/d)`` for each ``r``.

    Returns the label and whether it was the same for every ``r`` (and not
    an exact tie). Qubit only.
    """
    sites = list(sites)
    if query.dim != 2 or any(s.dim != 2 for s in sites):
        raise DimensionMismatch("the radial pure-state limit is defined for qubits")
    r_sequence = _check_r_sequence(r_sequence)
    labels = []
    margin = np.inf
    for r in r_sequence:
        shrunk = [shrink_toward_center(s, r) for s in sites]
        idx, margin = _rank(distance_matrix([query], shrunk, DistanceKind.DIVERGENCE), "nearest")
        labels.append(int(idx[0]))
        margin = float(margin[0])
    stable = len(set(labels)) == 1 and margin > 0.0
    return labels[-1], stable


def labelings_agree(a: Labeling, b: Labeling) -> AgreementReport:
    if len(a) != len(b):
        raise LengthMismatch(f"labelings of {len(a)} and {len(b)} samples")
    ok = ~a.boundary_mask & ~b.boundary_mask
    bad = np.flatnonzero(ok & (a.assignments != b.assignments))
    return AgreementReport(
        compared=int(ok.sum()),
        mismatches=int(bad.size),
        mismatch_indices=tuple(int(i) for i in bad),
        band=float(max(a.band, b.band)),
        labels=(a.kind.value, b.kind.value),
    )


def pairwise_agreement(labelings: Mapping[str, Labeling]) -> dict[tuple[str, str], AgreementReport]:
    names = list(labelings)
    return {
        (p, q): labelings_agree(labelings[p], labelings[q])
        for i, p in enumerate(names)
        for q in names[i + 1 :]
    }


# --- sample sets -----------------------------------------------------------------

def fibonacci_points(n: int) -> np.ndarray:
    """``(n, 3)`` unit vectors on the Fibonacci lattice."""
    if n < 1:
        raise RangeError("need at least one point")
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    pts = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def fibonacci_sphere(n: int) -> list[BlochVector]:
    return [BlochVector.from_array(p) for p in fibonacci_points(n)]


def _qubit_states(vectors: np.ndarray) -> list[DensityMatrix]:
    mats = bloch_matrix(vectors[:, 0], vectors[:, 1], vectors[:, 2])
    mats = np.moveaxis(mats, -1, 0)
    return [DensityMatrix._trusted(m) for m in mats]


def sample_sphere(n: int, seed: int) -> list[DensityMatrix]:
    """``n`` uniformly random pure qubit states."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return _qubit_states(v)


def sample_mixed_ball(n: int, rmax: float, seed: int) -> list[DensityMatrix]:
    """``n`` qubit states with Bloch vectors uniform in the ball of radius ``rmax``."""
    if not 0.0 < rmax < 1.0:
        raise RangeError(f"rmax must lie in (0, 1), got {rmax}")
    if n == 0:
        return []
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    v *= rmax * rng.random(n)[:, None] ** (1.0 / 3.0)
    return _qubit_states(v)


def sample_pure(n: int, d: int, seed: int) -> list[DensityMatrix]:
    """``n`` Haar-random pure states of dimension ``d``."""
    rng = np.random.default_rng(seed)
    return [DensityMatrix._trusted(m) for m in random_pure_matrices(n, d, rng)]


def random_pure_sites(k: int, d: int, seed: int) -> SiteSet:
    return SiteSet(sample_pure(k, d, seed) if d != 2 else sample_sphere(k, seed))


# --- export ---------------------------------------------------------------------

def sample_coordinates(samples: Sequence[DensityMatrix]) -> tuple[list[str], np.ndarray]:
    if not samples:
        return ["x", "y", "z"], np.empty((0, 3))
    M = stack(samples)
    d = M.shape[-1]
    if d == 2:
        return ["x", "y", "z"], bloch_coordinates(M)
    return [f"xi_{i}" for i in range(1, d * d)], xi_values(M)


def _fmt(v: float) -> str:
    return repr(float(v))


def labelings_csv(
    samples: Sequence[DensityMatrix],
    labelings: Mapping[str, Labeling],
    metadata: Mapping[str, object] | None = None,
) -> str:
    """CSV text: ``sample_index, coords..., label_<k>, margin_<k>, boundary_<k>``.

    ``metadata`` is written as leading ``# key=value`` comment lines.
    """
    names, coords = sample_coordinates(samples)
    buf = io.StringIO()
    for key, val in (metadata or {}).items():
        buf.write(f"# {key}={val}\n")
    w = csv.writer(buf, lineterminator="\n")
    header = ["sample_index", *names]
    for k in labelings:
        header += [f"label_{k}", f"margin_{k}", f"boundary_{k}"]
    w.writerow(header)
    for i in range(len(samples)):
        row = [str(i), *(_fmt(c) for c in coords[i])]
        for lab in labelings.values():
            row += [str(int(lab.assignments[i])), _fmt(lab.margins[i]), str(int(lab.boundary_mask[i]))]
        w.writerow(row)
    return buf.getvalue()


def read_labeling_csv(text: str) -> tuple[dict[str, str], list[str], list[dict[str, str]]]:
    """Parse :func:`labelings_csv` output into (metadata, header, rows)."""
    meta: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key.strip()] = val.strip()
        elif line.strip():
            body.append(line)
    if not body:
        return meta, [], []
    reader = csv.DictReader(body)
    rows = list(reader)
    return meta, list(reader.fieldnames or []), rows


def report_json(report: AgreementReport, metadata: Mapping[str, object] | None = None) -> str:
    payload = {**report.to_dict(), "pair": list(report.labels)}
    if metadata:
        payload["metadata"] = dict(metadata)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
