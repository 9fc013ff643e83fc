"""Synthetic fingerprint model, scan pipeline, matching, and error rates.

Fingerprints are minutiae point clouds in the unit square, not raster
images. A scan is produced by sampling a ground-truth cloud through a
parametric sensor (jitter, dropout, spurious points, pose offset), then
cleaned and re-centered before matching. The matcher sweeps a discrete
set of rotations and greedily pairs mutually nearest minutiae; the card
decision is a threshold on the resulting score.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .crypto import derive_seed_int

TWO_PI = 2.0 * math.pi

MAX_TEMPLATE_MINUTIAE = 256
DEFAULT_MIN_SEPARATION = 0.06


class InvalidPopulation(Exception):
    """Requested population or minutiae count is out of range."""


class EmptyTemplate(Exception):
    """Operation requires a nonempty template."""


def wrap_angle(a: float) -> float:
    """Normalize to [0, 2*pi). Guards the float edge where x % 2pi == 2pi."""
    a = a % TWO_PI
    return 0.0 if a >= TWO_PI else a


def _wrap_angles(a: np.ndarray) -> np.ndarray:
    out = np.mod(a, TWO_PI)
    out[out >= TWO_PI] = 0.0
    return out


def angle_difference(a: float | np.ndarray, b: float | np.ndarray):
    """Absolute angular distance on the circle, in [0, pi]."""
    return np.abs((np.asarray(a) - np.asarray(b) + math.pi) % TWO_PI - math.pi)


# ---------------------------------------------------------------------------
# Domain types


class MinutiaKind(str, Enum):
    RIDGE_ENDING = "ending"
    BIFURCATION = "bifurcation"


@dataclass(frozen=True)
class Minutia:
    x: float
    y: float
    angle: float
    kind: MinutiaKind

    def __post_init__(self) -> None:
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise ValueError(f"minutia outside unit square: ({self.x}, {self.y})")
        if not (0.0 <= self.angle < TWO_PI):
            raise ValueError(f"minutia angle out of [0, 2pi): {self.angle}")


@dataclass(frozen=True)
class FingerprintTemplate:
    """The only biometric artifact; after enrollment it lives on the card."""

    minutiae: tuple[Minutia, ...]
    finger_label: str = ""
    quality: float = 1.0

    def __post_init__(self) -> None:
        if len(self.minutiae) > MAX_TEMPLATE_MINUTIAE:
            raise ValueError(f"too many minutiae: {len(self.minutiae)}")
        if not (0.0 <= self.quality <= 1.0):
            raise ValueError(f"quality out of [0, 1]: {self.quality}")

    def __len__(self) -> int:
        return len(self.minutiae)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(n,2) coordinates, (n,) angles, (n,) kind codes."""
        n = len(self.minutiae)
        xy = np.empty((n, 2))
        angles = np.empty(n)
        kinds = np.empty(n, dtype=np.uint8)
        for i, m in enumerate(self.minutiae):
            xy[i] = (m.x, m.y)
            angles[i] = m.angle
            kinds[i] = _KIND_CODE[m.kind]
        return xy, angles, kinds

    def to_json_dict(self) -> dict:
        return {
            "finger_label": self.finger_label,
            "quality": self.quality,
            "minutiae": [[m.x, m.y, m.angle, m.kind.value] for m in self.minutiae],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "FingerprintTemplate":
        minutiae = tuple(
            Minutia(float(x), float(y), float(angle), MinutiaKind(kind))
            for x, y, angle, kind in doc["minutiae"]
        )
        return cls(
            minutiae=minutiae,
            finger_label=doc.get("finger_label", ""),
            quality=float(doc.get("quality", 1.0)),
        )

    @classmethod
    def from_json(cls, text: str) -> "FingerprintTemplate":
        return cls.from_json_dict(json.loads(text))


_KIND_CODE = {MinutiaKind.RIDGE_ENDING: 0, MinutiaKind.BIFURCATION: 1}
_CODE_KIND = {0: MinutiaKind.RIDGE_ENDING, 1: MinutiaKind.BIFURCATION}


@dataclass
class SensorModel:
    """Noise model for a desk-scale simulated fingerprint reader."""

    jitter_sigma: float = 0.005
    angle_sigma: float = 0.05
    dropout_prob: float = 0.05
    spurious_rate: float = 1.0
    max_rotation: float = 0.26
    max_translation: float = 0.05

    def __post_init__(self) -> None:
        for name in ("jitter_sigma", "angle_sigma", "dropout_prob",
                     "spurious_rate", "max_rotation", "max_translation"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.dropout_prob > 1.0:
            raise ValueError("dropout_prob must be <= 1")

    @classmethod
    def noiseless(cls) -> "SensorModel":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass
class MatchConfig:
    distance_tol: float = 0.03
    angle_tol: float = 0.26
    rotation_candidates: int = 64
    decision_threshold: float = 0.40
    min_enroll_minutiae: int = 12

    def __post_init__(self) -> None:
        if self.distance_tol <= 0 or self.angle_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.rotation_candidates < 1 or self.min_enroll_minutiae < 1:
            raise ValueError("counts must be positive")
        if not (0.0 < self.decision_threshold < 1.0):
            raise ValueError("decision_threshold must be in (0, 1)")


@dataclass
class PointCloud:
    """Unvalidated minutiae arrays flowing through the scan pipeline."""

    xy: np.ndarray
    angles: np.ndarray
    kinds: np.ndarray

    def __len__(self) -> int:
        return len(self.xy)

    @classmethod
    def empty(cls) -> "PointCloud":
        return cls(np.zeros((0, 2)), np.zeros(0), np.zeros(0, dtype=np.uint8))


@dataclass
class RawScan(PointCloud):
    """Sensor output; the applied pose offset is hidden from the matcher."""

    applied_rotation: float = 0.0
    applied_translation: np.ndarray = field(default_factory=lambda: np.zeros(2))


@dataclass(frozen=True)
class MatchResult:
    score: float
    matched_pairs: int
    aligned_rotation: float
    decision: bool


@dataclass(frozen=True)
class RateRow:
    threshold: float
    fer: float
    frr: float
    far: float


@dataclass(frozen=True)
class RatesReport:
    rows: tuple[RateRow, ...]
    genuine_trials: int
    impostor_trials: int
    population: int
    seed: int

    def __post_init__(self) -> None:
        for row in self.rows:
            for v in (row.fer, row.frr, row.far):
                if not (0.0 <= v <= 1.0):
                    raise ValueError(f"rate out of [0, 1]: {v}")
        frrs = [r.frr for r in self.rows]
        fars = [r.far for r in self.rows]
        if any(b < a for a, b in zip(frrs, frrs[1:])):
            raise ValueError("FRR must be non-decreasing in threshold")
        if any(b > a for a, b in zip(fars, fars[1:])):
            raise ValueError("FAR must be non-increasing in threshold")

    def to_csv(self) -> str:
        lines = ["threshold,fer,frr,far,genuine_trials,impostor_trials"]
        for row in self.rows:
            lines.append(
                f"{row.threshold},{row.fer},{row.frr},{row.far},"
                f"{self.genuine_trials},{self.impostor_trials}"
            )
        return "\n".join(lines) + "\n"


def template_cloud(template: FingerprintTemplate) -> PointCloud:
    xy, angles, kinds = template.arrays()
    return PointCloud(xy, angles, kinds)


# ---------------------------------------------------------------------------
# Synthesis


def synthesize_finger(
    seed: int,
    n_minutiae: int,
    *,
    min_separation: float = DEFAULT_MIN_SEPARATION,
    label: str | None = None,
) -> FingerprintTemplate:
    """Ground-truth finger: points kept pairwise >= ``min_separation`` apart
    so that greedy matching at the default tolerance is well-posed.
    """
    if not (1 <= n_minutiae <= MAX_TEMPLATE_MINUTIAE):
        raise InvalidPopulation(
            f"n_minutiae must be in [1, {MAX_TEMPLATE_MINUTIAE}], got {n_minutiae}"
        )
    rng = np.random.default_rng(seed)
    placed = _dart_throw(rng, n_minutiae, min_separation)
    if placed is None:
        placed = _jittered_grid(rng, n_minutiae, min_separation)
    angles = _wrap_angles(rng.uniform(0.0, TWO_PI, n_minutiae))
    kinds = rng.integers(0, 2, n_minutiae)
    minutiae = tuple(
        Minutia(float(x), float(y), float(a), _CODE_KIND[int(k)])
        for (x, y), a, k in zip(placed, angles, kinds)
    )
    return FingerprintTemplate(
        minutiae=minutiae,
        finger_label=label if label is not None else f"finger-{seed}",
        quality=1.0,
    )


def _dart_throw(rng: np.random.Generator, n: int, sep: float) -> np.ndarray | None:
    points = np.empty((n, 2))
    count = 0
    budget = 5000 * n
    while count < n and budget > 0:
        candidate = rng.random(2)
        budget -= 1
        if count == 0 or np.min(
            np.linalg.norm(points[:count] - candidate, axis=1)
        ) >= sep:
            points[count] = candidate
            count += 1
    return points if count == n else None


def _jittered_grid(rng: np.random.Generator, n: int, sep: float) -> np.ndarray:
    # Densest fallback that still honors the separation for n up to 256.
    side = 16
    spacing = 1.0 / side
    jitter = max(0.0, (spacing - sep) / 2.0)
    if spacing - 2 * jitter < sep - 1e-12:
        raise InvalidPopulation(
            f"cannot place {n} points at separation {sep} in the unit square"
        )
    cells = rng.permutation(side * side)[:n]
    centers = np.stack(
        [(cells % side + 0.5) * spacing, (cells // side + 0.5) * spacing], axis=1
    )
    offsets = rng.uniform(-jitter, jitter, (n, 2))
    return np.clip(centers + offsets, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Scan pipeline


def acquire_scan(
    truth: FingerprintTemplate, sensor: SensorModel, seed: int
) -> RawScan:
    """Simulated sensor read: dropout, jitter, spurious points, pose offset.

    Deterministic given the seed; the RNG draw order is fixed so that the
    same (truth, sensor, seed) triple always yields the same scan.
    """
    if len(truth) == 0:
        raise EmptyTemplate("cannot scan an empty template")
    rng = np.random.default_rng(seed)
    xy, angles, kinds = truth.arrays()
    n = len(xy)

    keep = rng.random(n) >= sensor.dropout_prob
    xy = xy[keep] + rng.normal(0.0, sensor.jitter_sigma, (n, 2))[keep]
    angles = _wrap_angles(angles[keep] + rng.normal(0.0, sensor.angle_sigma, n)[keep])
    kinds = kinds[keep]

    n_spurious = int(rng.poisson(sensor.spurious_rate))
    if n_spurious:
        xy = np.vstack([xy, rng.random((n_spurious, 2))])
        angles = np.concatenate(
            [angles, _wrap_angles(rng.uniform(0.0, TWO_PI, n_spurious))]
        )
        kinds = np.concatenate(
            [kinds, rng.integers(0, 2, n_spurious).astype(np.uint8)]
        )

    rotation = float(rng.uniform(-sensor.max_rotation, sensor.max_rotation))
    translation = rng.uniform(-sensor.max_translation, sensor.max_translation, 2)
    if rotation != 0.0:
        c, s = math.cos(rotation), math.sin(rotation)
        centered = xy - 0.5
        xy = np.stack(
            [
                centered[:, 0] * c - centered[:, 1] * s,
                centered[:, 0] * s + centered[:, 1] * c,
            ],
            axis=1,
        ) + 0.5
        angles = _wrap_angles(angles + rotation)
    if np.any(translation != 0.0):
        xy = xy + translation

    return RawScan(
        xy=xy,
        angles=angles,
        kinds=kinds.astype(np.uint8),
        applied_rotation=rotation,
        applied_translation=translation,
    )


def enhance_scan(raw: PointCloud, config: MatchConfig) -> PointCloud:
    """Point-cloud cleanup standing in for image enhancement.

    Clamps stray points back into the unit square and merges near
    duplicates (closer than half the matching tolerance) into their
    midpoint with a circular-mean direction. Idempotent: the output has
    no pair closer than the merge threshold.
    """
    if len(raw) == 0:
        return PointCloud.empty()
    xy = np.clip(np.asarray(raw.xy, dtype=float), 0.0, 1.0)
    angles = _wrap_angles(np.asarray(raw.angles, dtype=float).copy())
    kinds = np.asarray(raw.kinds, dtype=np.uint8).copy()
    threshold = config.distance_tol / 2.0

    while len(xy) >= 2:
        diff = xy[:, None, :] - xy[None, :, :]
        dist = np.sqrt((diff**2).sum(-1))
        np.fill_diagonal(dist, np.inf)
        # argmin is row-major, so ties resolve to the smallest (i, j).
        flat = int(np.argmin(dist))
        i, j = divmod(flat, len(xy))
        if i > j:
            i, j = j, i
        if dist[i, j] >= threshold:
            break
        xy[i] = (xy[i] + xy[j]) / 2.0
        angles[i] = _circular_mean(angles[i], angles[j])
        # kinds[i] already holds the lower-index kind
        xy = np.delete(xy, j, axis=0)
        angles = np.delete(angles, j)
        kinds = np.delete(kinds, j)

    return PointCloud(xy=xy, angles=angles, kinds=kinds)


def _circular_mean(a: float, b: float) -> float:
    x = math.cos(a) + math.cos(b)
    y = math.sin(a) + math.sin(b)
    if math.hypot(x, y) < 1e-12:
        return wrap_angle(a)
    return wrap_angle(math.atan2(y, x))


def extract_features(
    clean: PointCloud, config: MatchConfig, *, label: str = "scan"
) -> FingerprintTemplate:
    """Re-center the cloud on (0.5, 0.5) and package it as a template."""
    n = len(clean)
    if n == 0:
        return FingerprintTemplate(minutiae=(), finger_label=label, quality=0.0)
    xy = np.asarray(clean.xy, dtype=float)
    xy = np.clip(xy + (0.5 - xy.mean(axis=0)), 0.0, 1.0)
    angles = _wrap_angles(np.asarray(clean.angles, dtype=float))
    if n > MAX_TEMPLATE_MINUTIAE:
        xy = xy[:MAX_TEMPLATE_MINUTIAE]
        angles = angles[:MAX_TEMPLATE_MINUTIAE]
        n = MAX_TEMPLATE_MINUTIAE
    minutiae = tuple(
        Minutia(float(x), float(y), float(a), _CODE_KIND[int(k)])
        for (x, y), a, k in zip(xy, angles, clean.kinds[:n])
    )
    quality = min(1.0, n / config.min_enroll_minutiae)
    return FingerprintTemplate(minutiae=minutiae, finger_label=label, quality=quality)


# ---------------------------------------------------------------------------
# Matching

# Translation refinement: dropout and spurious points perturb the probe
# centroid by up to ~2x the pairing tolerance, so after the centroid
# pre-alignment a dominant-displacement vote recovers the true offset.
_ALIGN_WINDOW_FACTOR = 3.0  # capture window for displacement votes
_ALIGN_BOUND_FACTOR = 4.0  # window + tolerance: sound pair-count bound
_ALIGN_VOTE_FACTOR = 0.5  # vote radius around each displacement


def rotation_candidates(config: MatchConfig) -> np.ndarray:
    k = config.rotation_candidates
    return TWO_PI * np.arange(k) / k


def _aligned_probe(
    ref_xy: np.ndarray, probe_xy: np.ndarray, probe_angles: np.ndarray, rotation: float
) -> tuple[np.ndarray, np.ndarray]:
    """Rotate the probe about (0.5, 0.5), then shift its centroid onto the
    reference centroid."""
    if rotation != 0.0:
        c, s = math.cos(rotation), math.sin(rotation)
        centered = probe_xy - 0.5
        xy = np.stack(
            [
                centered[:, 0] * c - centered[:, 1] * s,
                centered[:, 0] * s + centered[:, 1] * c,
            ],
            axis=1,
        ) + 0.5
        angles = _wrap_angles(probe_angles + rotation)
    else:
        xy = probe_xy.copy()
        angles = probe_angles.copy()
    xy += ref_xy.mean(axis=0) - xy.mean(axis=0)
    return xy, angles


def _refined_shift(dv: np.ndarray, coarse_mask: np.ndarray, config: MatchConfig) -> np.ndarray:
    """Translation that the most compatible displacement vectors agree on.

    ``dv`` is probe-minus-reference displacements (R, P, 2) after centroid
    alignment; candidates are the coarse-compatible cells. Ties resolve to
    the first candidate in (ref_idx, probe_idx) order.
    """
    idx = np.argwhere(coarse_mask)
    if len(idx) == 0:
        return np.zeros(2)
    vectors = dv[idx[:, 0], idx[:, 1]]
    vote_r2 = (config.distance_tol * _ALIGN_VOTE_FACTOR) ** 2
    spread = ((vectors[:, None, :] - vectors[None, :, :]) ** 2).sum(-1)
    agree = spread <= vote_r2
    best = int(np.argmax(agree.sum(axis=1)))
    return vectors[agree[best]].mean(axis=0)


def compatible_pairs(
    reference: FingerprintTemplate,
    probe: FingerprintTemplate,
    config: MatchConfig,
    rotation: float,
) -> list[tuple[float, int, int]]:
    """All (distance, ref_idx, probe_idx) pairs compatible at one rotation
    after alignment, sorted by (distance, ref_idx, probe_idx)."""
    ref_xy, ref_angles, ref_kinds = reference.arrays()
    probe_xy, probe_angles, probe_kinds = probe.arrays()
    if len(ref_xy) == 0 or len(probe_xy) == 0:
        return []
    xy, angles = _aligned_probe(ref_xy, probe_xy, probe_angles, rotation)
    dv = xy[None, :, :] - ref_xy[:, None, :]
    norm2 = (dv**2).sum(-1)
    adiff = angle_difference(ref_angles[:, None], angles[None, :])
    compat = (adiff <= config.angle_tol) & (ref_kinds[:, None] == probe_kinds[None, :])
    coarse = compat & (norm2 <= (config.distance_tol * _ALIGN_WINDOW_FACTOR) ** 2)
    shift = _refined_shift(dv, coarse, config)
    shifted2 = ((dv - shift) ** 2).sum(-1)
    mask = compat & (shifted2 <= config.distance_tol**2)
    pairs = [
        (float(math.sqrt(shifted2[i, j])), int(i), int(j)) for i, j in np.argwhere(mask)
    ]
    pairs.sort()
    return pairs


def _greedy_pair_count(d2: np.ndarray, mask: np.ndarray) -> int:
    """Greedy mutually-nearest pairing: admit candidate pairs by increasing
    distance (ties to the smallest indices), skipping used endpoints."""
    idx = np.argwhere(mask)
    if len(idx) == 0:
        return 0
    i_arr, j_arr = idx[:, 0], idx[:, 1]
    order = np.lexsort((j_arr, i_arr, d2[i_arr, j_arr]))
    used_i: set[int] = set()
    used_j: set[int] = set()
    count = 0
    for k in order:
        i, j = int(i_arr[k]), int(j_arr[k])
        if i in used_i or j in used_j:
            continue
        used_i.add(i)
        used_j.add(j)
        count += 1
    return count


def match_templates(
    reference: FingerprintTemplate, probe: FingerprintTemplate, config: MatchConfig
) -> MatchResult:
    """Best greedy pairing over the discrete rotation sweep.

    Ties between rotations go to the smallest rotation index; an empty
    side scores 0 and never unlocks.
    """
    n_ref, n_probe = len(reference), len(probe)
    if n_ref == 0 or n_probe == 0:
        return MatchResult(score=0.0, matched_pairs=0, aligned_rotation=0.0, decision=False)

    ref_xy, ref_angles, ref_kinds = reference.arrays()
    probe_xy, probe_angles, probe_kinds = probe.arrays()
    thetas = rotation_candidates(config)
    cos, sin = np.cos(thetas), np.sin(thetas)

    centered = probe_xy - 0.5
    rx = centered[:, 0][None, :] * cos[:, None] - centered[:, 1][None, :] * sin[:, None]
    ry = centered[:, 0][None, :] * sin[:, None] + centered[:, 1][None, :] * cos[:, None]
    rotated = np.stack([rx, ry], axis=-1) + 0.5  # (K, P, 2)
    shift = ref_xy.mean(axis=0)[None, :] - rotated.mean(axis=1)
    aligned = rotated + shift[:, None, :]

    dv = aligned[:, None, :, :] - ref_xy[None, :, None, :]  # (K, R, P, 2)
    norm2 = (dv**2).sum(-1)
    rot_angles = _wrap_angles(probe_angles[None, :] + thetas[:, None])
    adiff = angle_difference(ref_angles[None, :, None], rot_angles[:, None, :])
    compat = (adiff <= config.angle_tol) & (
        ref_kinds[:, None] == probe_kinds[None, :]
    )[None, :, :]
    coarse = compat & (norm2 <= (config.distance_tol * _ALIGN_WINDOW_FACTOR) ** 2)
    # A refined shift moves points by at most the capture window, so pairs
    # matched after shifting all sit inside the wider bound window.
    upper = (compat & (norm2 <= (config.distance_tol * _ALIGN_BOUND_FACTOR) ** 2)).sum(
        axis=(1, 2)
    )

    tol2 = config.distance_tol**2
    best_pairs = 0
    best_k = 0
    for k in range(len(thetas)):
        if upper[k] <= best_pairs:
            continue  # greedy count never exceeds the candidate bound
        t = _refined_shift(dv[k], coarse[k], config)
        shifted2 = ((dv[k] - t) ** 2).sum(-1)
        pairs = _greedy_pair_count(shifted2, compat[k] & (shifted2 <= tol2))
        if pairs > best_pairs:
            best_pairs = pairs
            best_k = k

    score = 2.0 * best_pairs / (n_ref + n_probe)
    return MatchResult(
        score=score,
        matched_pairs=best_pairs,
        aligned_rotation=float(thetas[best_k]),
        decision=score >= config.decision_threshold,
    )


# ---------------------------------------------------------------------------
# Enrollment quality and error rates


def enroll_quality(template: FingerprintTemplate, config: MatchConfig) -> float | None:
    """Quality in [0, 1] when enrollable, None on failure to enroll."""
    if len(template) < config.min_enroll_minutiae:
        return None
    return min(1.0, len(template) / config.min_enroll_minutiae)


def scan_to_template(
    truth: FingerprintTemplate,
    sensor: SensorModel,
    config: MatchConfig,
    seed: int,
    *,
    label: str = "scan",
) -> FingerprintTemplate:
    """Full acquisition pipeline: sensor read, cleanup, feature extraction."""
    raw = acquire_scan(truth, sensor, seed)
    return extract_features(enhance_scan(raw, config), config, label=label)


def evaluate_rates(
    population: int,
    sensor: SensorModel,
    thresholds: list[float],
    trials_per_subject: int,
    seed: int,
    *,
    match_config: MatchConfig | None = None,
    minutiae_range: tuple[int, int] = (8, 40),
    impostor_budget: int = 2000,
) -> RatesReport:
    """FER plus per-threshold FRR/FAR over a synthetic population.

    Enrollment is judged on the pristine reference template; genuine and
    impostor probes go through the full scan pipeline. All sub-seeds are
    label-derived so the result does not depend on evaluation order.
    """
    if population < 2:
        raise InvalidPopulation(f"population must be >= 2, got {population}")
    if not thresholds:
        raise ValueError("thresholds must be nonempty")
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be sorted ascending")
    lo, hi = minutiae_range
    if not (1 <= lo <= hi <= MAX_TEMPLATE_MINUTIAE):
        raise ValueError(f"bad minutiae range: {minutiae_range}")
    config = match_config if match_config is not None else MatchConfig()

    truths = []
    for i in range(population):
        count = lo + derive_seed_int(seed, f"rates/count/{i}") % (hi - lo + 1)
        truths.append(
            synthesize_finger(
                derive_seed_int(seed, f"rates/finger/{i}"), count, label=f"subject-{i}"
            )
        )
    enrolled = [
        i for i in range(population) if enroll_quality(truths[i], config) is not None
    ]
    fer = 1.0 - len(enrolled) / population

    genuine_scores = []
    for i in enrolled:
        for t in range(trials_per_subject):
            probe = scan_to_template(
                truths[i], sensor, config, derive_seed_int(seed, f"rates/genuine/{i}/{t}")
            )
            genuine_scores.append(match_templates(truths[i], probe, config).score)

    impostor_pairs = [
        (a, b) for a in enrolled for b in enrolled if a != b
    ][:impostor_budget]
    impostor_scores = []
    for a, b in impostor_pairs:
        probe = scan_to_template(
            truths[b], sensor, config, derive_seed_int(seed, f"rates/impostor/{a}/{b}")
        )
        impostor_scores.append(match_templates(truths[a], probe, config).score)

    genuine = np.asarray(genuine_scores)
    impostor = np.asarray(impostor_scores)
    rows = []
    for t in thresholds:
        frr = float(np.mean(genuine < t)) if len(genuine) else 0.0
        far = float(np.mean(impostor >= t)) if len(impostor) else 0.0
        rows.append(RateRow(threshold=float(t), fer=fer, frr=frr, far=far))
    return RatesReport(
        rows=tuple(rows),
        genuine_trials=len(genuine_scores),
        impostor_trials=len(impostor_scores),
        population=population,
        seed=seed,
    )
