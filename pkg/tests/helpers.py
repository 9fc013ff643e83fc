"""Independent oracles and small utilities shared across test modules."""

from __future__ import annotations

import math
from itertools import combinations, permutations

from eidkit.biometrics import (
    FingerprintTemplate,
    Minutia,
    MatchConfig,
    SensorModel,
    scan_to_template,
    synthesize_finger,
    wrap_angle,
)
from eidkit.crypto import derive_seed_int


def brute_force_max_pairs(
    compatible: list[tuple[float, int, int]], n_ref: int, n_probe: int
) -> int:
    """Maximum-cardinality pairing by exhaustive search over all injective
    assignments of reference to probe minutiae. Independent of the greedy
    path: it only consumes the compatibility relation."""
    compat = {(i, j) for _, i, j in compatible}
    if not compat:
        return 0
    upper = min(n_ref, n_probe, len(compat))
    for k in range(upper, 0, -1):
        for ref_subset in combinations(range(n_ref), k):
            for probe_choice in permutations(range(n_probe), k):
                if all(pair in compat for pair in zip(ref_subset, probe_choice)):
                    return k
    return 0


def rotate_template(template: FingerprintTemplate, rotation: float) -> FingerprintTemplate:
    """Rigid rotation about (0.5, 0.5); raises if any point leaves the square."""
    c, s = math.cos(rotation), math.sin(rotation)
    rotated = []
    for m in template.minutiae:
        x, y = m.x - 0.5, m.y - 0.5
        rotated.append(
            Minutia(
                x * c - y * s + 0.5,
                x * s + y * c + 0.5,
                wrap_angle(m.angle + rotation),
                m.kind,
            )
        )
    return FingerprintTemplate(
        minutiae=tuple(rotated), finger_label=template.finger_label, quality=template.quality
    )


def shrink_template(template: FingerprintTemplate, factor: float) -> FingerprintTemplate:
    """Scale the cloud toward the center so rotations cannot clamp."""
    scaled = tuple(
        Minutia(
            (m.x - 0.5) * factor + 0.5, (m.y - 0.5) * factor + 0.5, m.angle, m.kind
        )
        for m in template.minutiae
    )
    return FingerprintTemplate(scaled, template.finger_label, template.quality)


def genuine_probe(
    truth: FingerprintTemplate,
    seed_space: str,
    index: int,
    sensor: SensorModel | None = None,
    config: MatchConfig | None = None,
) -> FingerprintTemplate:
    sensor = sensor if sensor is not None else SensorModel()
    config = config if config is not None else MatchConfig()
    return scan_to_template(
        truth, sensor, config, derive_seed_int(7777, f"{seed_space}/{index}")
    )


def population(count: int, n_minutiae: int, seed_space: str) -> list[FingerprintTemplate]:
    return [
        synthesize_finger(
            derive_seed_int(7777, f"{seed_space}/finger/{i}"), n_minutiae, label=f"f{i}"
        )
        for i in range(count)
    ]
