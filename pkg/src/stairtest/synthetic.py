"""Synthetic models at an exactly known total variation from the reference."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .errors import InputError
from .stair import RegionUniform, StairDistribution

WITHIN_SUPPORT = "within_support"
ONTO_ZERO_REGION = "onto_zero_region"
WITHIN_REGION = "within_region"
MODES = (WITHIN_SUPPORT, ONTO_ZERO_REGION, WITHIN_REGION)

DEFAULT_SUITE = (0.0, 0.1, 0.15, 0.2)


class PerturbedDistribution(RegionUniform):
    """The reference with ``target_tv`` mass moved from a donor block to a receiver block.

    Mass leaves the donor uniformly and arrives uniformly, so the result is
    region-uniform on a (possibly refined) set of blocks. For
    ``within_region`` donor and receiver are the two halves of one flat
    region, which keeps every region's total mass unchanged.
    """

    def __init__(self, base: StairDistribution, edges, probs, target_tv: float, mode: str,
                 donor: int, receiver: int):
        super().__init__(base.space, edges, probs)
        self.base = base
        self.target_tv = float(target_tv)
        self.mode = mode
        self.donor = donor
        self.receiver = receiver

    def exact_tv(self) -> float:
        """Closed-form TV to the base over the common refinement of both block sets."""
        cuts = np.union1d(self.edges, self.base.edges)
        left = cuts[:-1]
        diff = np.abs(self.pmf(left) - self.base.pmf(left))
        return 0.5 * float(np.dot(np.diff(cuts), diff))

    @property
    def adjustments(self) -> np.ndarray:
        """Per-block change of the per-element probability."""
        return self.probs - self.base.pmf(self.edges[:-1])

    def describe(self) -> dict:
        return {"target_tv": self.target_tv, "mode": self.mode, "donor": self.donor,
                "receiver": self.receiver}

    def __repr__(self):
        return (f"PerturbedDistribution(tv={self.target_tv}, {self.mode}, "
                f"donor={self.donor}, receiver={self.receiver})")


def perturb(p: StairDistribution, target_tv: float, mode: str = WITHIN_SUPPORT,
            donor: Optional[int] = None, receiver: Optional[int] = None) -> PerturbedDistribution:
    """Move ``target_tv`` mass inside ``p``.

    ``within_support`` takes it from region ``donor`` (default 1) to the last
    positive region, ``onto_zero_region`` to region ``s``, and
    ``within_region`` from the first half of region ``donor`` to its second
    half (``receiver`` is ignored there).
    """
    if mode not in MODES:
        raise InputError(f"unknown perturbation mode {mode!r}")
    if target_tv < 0:
        raise InputError("target_tv must be non-negative")
    s = p.s
    donor = 1 if donor is None else donor
    if not 1 <= donor <= s - 1:
        raise InputError(f"donor must be a positive region in [1, {s - 1}]")
    d = donor - 1
    edges = p.edges.tolist()
    probs = p.probs.tolist()

    if mode == WITHIN_REGION:
        start, end = edges[d], edges[d + 1]
        half = (end - start) // 2
        if half < 1:
            raise InputError(f"region {donor} is too small to move mass inside it")
        if target_tv >= half * probs[d]:
            raise InputError(f"target_tv={target_tv} is not below the donor half's mass "
                             f"{half * probs[d]:.6g}")
        edges.insert(d + 1, start + half)
        probs[d:d + 1] = [probs[d] - target_tv / half, probs[d] + target_tv / (end - start - half)]
        return PerturbedDistribution(p, edges, probs, target_tv, mode, donor, donor)

    if receiver is None:
        receiver = s if mode == ONTO_ZERO_REGION else s - 1
    if mode == ONTO_ZERO_REGION and receiver != s:
        raise InputError("onto_zero_region must send mass to region s")
    if mode == WITHIN_SUPPORT and not 1 <= receiver <= s - 1:
        raise InputError("within_support needs a positive receiver region")
    if donor == receiver:
        raise InputError("donor and receiver must differ")
    if target_tv >= p.region_masses[d]:
        raise InputError(f"target_tv={target_tv} is not below the donor region's mass "
                         f"{p.region_masses[d]:.6g}")
    r = receiver - 1
    probs[d] -= target_tv / p.sizes[d]
    probs[r] += target_tv / p.sizes[r]
    return PerturbedDistribution(p, edges, probs, target_tv, mode, donor, receiver)


def make_suite(p: StairDistribution, tvs: Sequence[float] = DEFAULT_SUITE,
               mode: str = WITHIN_REGION, donor: Optional[int] = None) -> list[PerturbedDistribution]:
    return [perturb(p, t, mode, donor=donor) for t in tvs]


def sample_perturbed(q: PerturbedDistribution, m: int, seed=None):
    return q.sample(m, seed)
