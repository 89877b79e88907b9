"""Two-domain dataset handling: CSV ingest, preprocessing, pairing and a
seeded synthetic benchmark generator with known ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

#: Sentinel for a sample without a label.  Real labels are class ids >= 1.
UNLABELED = -1


class DataFormatError(ValueError):
    """Malformed input file (carries file/line context in the message)."""


@dataclass
class DomainData:
    """One domain: features stored feature-by-sample plus aligned labels."""

    features: np.ndarray  # shape (dim, n)
    labels: np.ndarray  # shape (n,), ints, UNLABELED allowed

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix (dim x n)")
        if self.labels.shape != (self.features.shape[1],):
            raise ValueError(
                f"labels length {self.labels.shape[0]} does not match "
                f"{self.features.shape[1]} samples")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features contain non-finite entries")

    @property
    def dim(self) -> int:
        return self.features.shape[0]

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]


@dataclass
class HeteroDataset:
    """Source and target domains with a one-to-one cross-domain pairing.

    ``target_truth`` holds ground-truth target labels when known (synthetic
    data or a user-supplied truth file); it is only used for evaluation.
    """

    source: DomainData
    target: DomainData
    pairs: list[tuple[int, int]]
    class_count: int
    target_truth: np.ndarray | None = None


def validate_dataset(dataset: HeteroDataset) -> None:
    """Check every structural invariant; raises ValueError on violation."""
    src, tgt = dataset.source, dataset.target
    c = dataset.class_count
    if c < 1:
        raise ValueError("class_count must be >= 1")
    for name, dom in (("source", src), ("target", tgt)):
        labeled = dom.labels[dom.labels != UNLABELED]
        if labeled.size and (labeled.min() < 1 or labeled.max() > c):
            raise ValueError(f"{name} labels outside 1..{c}")
    if len(dataset.pairs) > min(src.n_samples, tgt.n_samples):
        raise ValueError("more pairs than samples in a domain")
    seen_s: set[int] = set()
    seen_t: set[int] = set()
    for i, j in dataset.pairs:
        if not (0 <= i < src.n_samples and 0 <= j < tgt.n_samples):
            raise ValueError(f"pair ({i},{j}) out of range")
        if i in seen_s or j in seen_t:
            raise ValueError(f"pair ({i},{j}) reuses an index")
        seen_s.add(i)
        seen_t.add(j)
        if src.labels[i] == UNLABELED or tgt.labels[j] == UNLABELED:
            raise ValueError(f"pair ({i},{j}) involves an unlabeled sample")
        if src.labels[i] != tgt.labels[j]:
            raise ValueError(
                f"pair ({i},{j}) label mismatch: "
                f"{src.labels[i]} vs {tgt.labels[j]}")
    if dataset.target_truth is not None:
        truth = np.asarray(dataset.target_truth)
        if truth.shape != (tgt.n_samples,):
            raise ValueError("target_truth length mismatch")


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------

def _read_lines(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def load_domain(features_path: str, labels_path: str) -> DomainData:
    """Read a feature CSV (row i = feature i) and a one-line label CSV.

    An empty label cell becomes UNLABELED.
    """
    rows: list[list[float]] = []
    width = None
    for lineno, line in enumerate(_read_lines(features_path), start=1):
        if not line.strip():
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise DataFormatError(
                f"{features_path}:{lineno}: expected {width} cells, "
                f"got {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise DataFormatError(f"{features_path}:{lineno}: {exc}") from exc
    if not rows:
        raise DataFormatError(f"{features_path}: no feature rows")
    features = np.array(rows)

    label_lines = [l for l in _read_lines(labels_path) if l.strip()]
    if len(label_lines) != 1:
        raise DataFormatError(
            f"{labels_path}: expected a single label line, "
            f"got {len(label_lines)}")
    labels = []
    for col, cell in enumerate(label_lines[0].split(","), start=1):
        cell = cell.strip()
        if not cell:
            labels.append(UNLABELED)
            continue
        try:
            value = int(cell)
        except ValueError as exc:
            raise DataFormatError(
                f"{labels_path}: cell {col}: not an integer label") from exc
        if value < 1:
            raise DataFormatError(
                f"{labels_path}: cell {col}: label {value} outside 1..C")
        labels.append(value)
    if len(labels) != features.shape[1]:
        raise DataFormatError(
            f"{labels_path}: {len(labels)} labels for "
            f"{features.shape[1]} samples")
    return DomainData(features=features, labels=np.array(labels))


def save_domain(data: DomainData, features_path: str, labels_path: str) -> None:
    """Inverse of load_domain; exact decimal round-trip via repr."""
    with open(features_path, "w", encoding="utf-8") as fh:
        for row in data.features:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    with open(labels_path, "w", encoding="utf-8") as fh:
        cells = ["" if l == UNLABELED else str(int(l)) for l in data.labels]
        fh.write(",".join(cells) + "\n")


def load_pairing(path: str, source: DomainData,
                 target: DomainData) -> list[tuple[int, int]]:
    """Read "s,t" index pairs (0-based) and validate them against the data."""
    pairs: list[tuple[int, int]] = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 2:
            raise DataFormatError(f"{path}:{lineno}: expected 's,t'")
        try:
            i, j = int(cells[0]), int(cells[1])
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
        pairs.append((i, j))
    seen_s: set[int] = set()
    seen_t: set[int] = set()
    for idx, (i, j) in enumerate(pairs, start=1):
        if not (0 <= i < source.n_samples and 0 <= j < target.n_samples):
            raise DataFormatError(f"{path}: pair {idx} ({i},{j}) out of range")
        if i in seen_s:
            raise DataFormatError(f"{path}: source index {i} used twice")
        if j in seen_t:
            raise DataFormatError(f"{path}: target index {j} used twice")
        seen_s.add(i)
        seen_t.add(j)
        if source.labels[i] == UNLABELED or target.labels[j] == UNLABELED:
            raise DataFormatError(
                f"{path}: pair {idx} ({i},{j}) involves an unlabeled sample")
        if source.labels[i] != target.labels[j]:
            raise DataFormatError(
                f"{path}: pair {idx} ({i},{j}) label mismatch "
                f"({source.labels[i]} vs {target.labels[j]})")
    return pairs


def save_pairing(pairs: list[tuple[int, int]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, j in pairs:
            fh.write(f"{i},{j}\n")


# ---------------------------------------------------------------------------
# preprocessing
# ---------------------------------------------------------------------------

PREPROCESS_SCHEMES = ("none", "zscore", "zscore_unitnorm")


def preprocess(data: DomainData, scheme: str) -> DomainData:
    """Feature-wise standardization, optionally followed by unit-norm samples.

    Feature rows with std below 1e-12 are centered but not scaled.
    """
    if scheme not in PREPROCESS_SCHEMES:
        raise ValueError(f"unknown preprocessing scheme {scheme!r}")
    if scheme == "none":
        return data
    if data.n_samples < 2:
        raise ValueError("zscore preprocessing requires at least 2 samples")
    x = data.features - data.features.mean(axis=1, keepdims=True)
    std = x.std(axis=1, keepdims=True)
    scale = np.where(std < 1e-12, 1.0, std)
    x = x / scale
    if scheme == "zscore_unitnorm":
        norms = np.linalg.norm(x, axis=0, keepdims=True)
        x = x / np.where(norms < 1e-12, 1.0, norms)
    return replace(data, features=x)


# ---------------------------------------------------------------------------
# synthetic benchmark generator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the latent-linear-map synthetic benchmark.

    Paired samples share one latent point; both domains see it through a
    fixed random linear map plus isotropic Gaussian noise.  ``noise_sigma``
    also controls the within-class latent spread, so sigma = 0 collapses
    every class onto its latent center and the task becomes exactly
    separable.
    """

    class_count: int = 4
    latent_dim: int = 5
    samples_per_domain: int = 100
    source_dim: int = 30
    target_dim: int = 20
    noise_sigma: float = 0.3
    pair_fraction: float = 0.3
    class_separation: float = 1.0

    def validate(self) -> None:
        if self.class_count < 1:
            raise ValueError("class_count must be >= 1")
        if self.latent_dim < 1 or self.latent_dim > min(self.source_dim,
                                                        self.target_dim):
            raise ValueError("latent_dim must lie in [1, min(d_s, d_t)]")
        if not 0.0 < self.pair_fraction <= 1.0:
            raise ValueError("pair_fraction must lie in (0, 1]")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")
        if self.class_separation <= 0.0:
            raise ValueError("class_separation must be > 0")
        if math.ceil(self.pair_fraction * self.samples_per_domain) \
                < self.class_count:
            raise ValueError(
                "pair_fraction * samples_per_domain must cover at least one "
                "pair per class")


def _class_centers(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    centers = rng.normal(size=(spec.class_count, spec.latent_dim))
    if spec.class_count == 1:
        return centers
    dmin = np.inf
    for i in range(spec.class_count):
        for j in range(i + 1, spec.class_count):
            dmin = min(dmin, float(np.linalg.norm(centers[i] - centers[j])))
    # rescale so the minimum pairwise distance meets class_separation exactly
    return centers * (spec.class_separation / dmin)


def _orthonormal_map(rows: int, cols: int,
                     rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(rows, cols)))
    return q[:, :cols]


def synth_generate(spec: SynthSpec, seed: int) -> HeteroDataset:
    """Deterministic two-domain benchmark with shared-latent paired samples.

    Exactly ceil(pair_fraction * n) pairs are generated, balanced over
    classes; target labels outside the pairs are UNLABELED and the full
    target truth is kept in ``target_truth``.
    """
    spec.validate()
    rng = np.random.default_rng(seed)
    centers = _class_centers(spec, rng)
    map_s = _orthonormal_map(spec.source_dim, spec.latent_dim, rng)
    map_t = _orthonormal_map(spec.target_dim, spec.latent_dim, rng)

    n = spec.samples_per_domain
    n_pair = math.ceil(spec.pair_fraction * n)
    sigma = spec.noise_sigma
    # classes cycle so both the pairs and the remainder stay balanced
    labels = np.array([(i % spec.class_count) + 1 for i in range(n)])

    pair_latent = centers[labels[:n_pair] - 1] \
        + sigma * rng.normal(size=(n_pair, spec.latent_dim))
    xs_pair = map_s @ pair_latent.T \
        + sigma * rng.normal(size=(spec.source_dim, n_pair))
    xt_pair = map_t @ pair_latent.T \
        + sigma * rng.normal(size=(spec.target_dim, n_pair))

    n_rest = n - n_pair
    if n_rest:
        rest_latent_s = centers[labels[n_pair:] - 1] \
            + sigma * rng.normal(size=(n_rest, spec.latent_dim))
        xs_rest = map_s @ rest_latent_s.T \
            + sigma * rng.normal(size=(spec.source_dim, n_rest))
        rest_latent_t = centers[labels[n_pair:] - 1] \
            + sigma * rng.normal(size=(n_rest, spec.latent_dim))
        xt_rest = map_t @ rest_latent_t.T \
            + sigma * rng.normal(size=(spec.target_dim, n_rest))
        xs = np.hstack([xs_pair, xs_rest])
        xt = np.hstack([xt_pair, xt_rest])
    else:
        xs, xt = xs_pair, xt_pair

    target_labels = labels.copy()
    target_labels[n_pair:] = UNLABELED
    dataset = HeteroDataset(
        source=DomainData(features=xs, labels=labels.copy()),
        target=DomainData(features=xt, labels=target_labels),
        pairs=[(i, i) for i in range(n_pair)],
        class_count=spec.class_count,
        target_truth=labels.copy(),
    )
    validate_dataset(dataset)
    return dataset
