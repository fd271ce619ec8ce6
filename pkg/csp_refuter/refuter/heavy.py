"""Heavy/light split of an instance by relation type."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from csp_refuter.csp.domain import Instance
from csp_refuter.csp.evaluate import empirical_relation_distribution
from csp_refuter.errors import InvalidParameters

logger = logging.getLogger(__name__)


@dataclass
class HeavySplit:
    """Heavy subinstances keyed by relation index, and the empirical mass of the rest."""

    heavy: dict = field(default_factory=dict)
    light: tuple[int, ...] = ()
    light_mass: Fraction = Fraction(0)
    masses: tuple[Fraction, ...] = ()
    threshold: float = 0.0

    @property
    def heavy_indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.heavy))


def heavy_threshold(epsilon: float, q: int, k: int) -> float:
    """delta = epsilon / (6 * 2^(q^k))."""
    return epsilon / (6 * 2 ** (q ** k))


def heavy_split(inst: Instance, delta: float) -> HeavySplit:
    """Partition constraints by relation; relations with empirical mass >= delta are heavy.

    Args:
        inst: Instance with at least one constraint.
        delta: Heavy threshold in (0, 1].

    Returns:
        HeavySplit: heavy subinstances and the total light mass.
    """
    if not 0 < delta <= 1:
        raise InvalidParameters(f"heavy threshold must lie in (0, 1], got {delta}")
    masses = empirical_relation_distribution(inst)
    heavy = {}
    light = []
    for r, mass in enumerate(masses):
        if mass == 0:
            continue
        if mass >= Fraction(delta):
            heavy[r] = inst.restrict_to_relation(r)
        else:
            light.append(r)
    light_mass = sum((masses[r] for r in light), Fraction(0))
    logger.debug("heavy relations %s, light mass %s", sorted(heavy), light_mass)
    return HeavySplit(heavy=heavy, light=tuple(light), light_mass=light_mass, masses=masses, threshold=delta)
