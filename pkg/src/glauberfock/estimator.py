"""Classical-light estimates of two-photon correlations.

Two coherent beams of unit amplitude enter guides ``k`` and ``l`` with a
relative phase ``theta``. For separable pairs the output intensity products
are averaged over phases and the single-guide products are subtracted. For
N00N pairs the phase is swept on a regular grid and the second harmonic of
the intensity product is extracted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .correlation import (
    CorrelationMatrix,
    Provenance,
    correlation_boson_separable,
    correlation_noon,
)
from .errors import InvalidArgumentError, InvalidPlanError
from .propagation import EvolutionOperator

#: Number of random relative phases used for the measured estimates.
PAPER_PHASE_SAMPLES = 60


@dataclass(frozen=True)
class PhasePlan:
    """How the relative phase between the two beams is chosen.

    ``mode`` is ``"random"`` (``num_samples`` uniform draws on [0, 2 pi) from
    numpy's PCG64 generator seeded with ``seed``) or ``"grid"``
    (``num_points`` equally spaced phases). Optional Gaussian jitter perturbs
    each sample's beam amplitudes (relative std) and relative phase (radians).
    """

    mode: str
    num_samples: int = PAPER_PHASE_SAMPLES
    seed: Optional[int] = None
    num_points: int = 0
    amplitude_jitter_std: float = 0.0
    phase_jitter_std: float = 0.0

    def __post_init__(self):
        if self.mode not in ("random", "grid"):
            raise InvalidPlanError(f"unknown phase plan mode {self.mode!r}")
        if self.mode == "random" and self.num_samples < 1:
            raise InvalidPlanError("a random phase plan needs at least one sample")
        if self.mode == "grid" and self.num_points < 1:
            raise InvalidPlanError("a grid phase plan needs at least one point")
        if self.amplitude_jitter_std < 0 or self.phase_jitter_std < 0:
            raise InvalidPlanError("jitter standard deviations must be >= 0")

    @classmethod
    def random_uniform(cls, num_samples=PAPER_PHASE_SAMPLES, seed=None, **noise):
        return cls("random", num_samples=num_samples, seed=seed, **noise)

    @classmethod
    def uniform_grid(cls, num_points, **noise):
        return cls("grid", num_points=num_points, **noise)

    @classmethod
    def parse(cls, text: str, seed=None) -> "PhasePlan":
        """Parse ``"M"`` (random) or ``"grid:P"``."""
        text = str(text).strip()
        try:
            if text.startswith("grid:"):
                return cls.uniform_grid(int(text[5:]))
            return cls.random_uniform(int(text), seed=seed)
        except ValueError:
            raise InvalidPlanError(f"cannot parse phase plan {text!r}; expected M or grid:P") from None

    @property
    def size(self) -> int:
        return self.num_samples if self.mode == "random" else self.num_points

    @property
    def noisy(self) -> bool:
        return self.amplitude_jitter_std > 0 or self.phase_jitter_std > 0

    def describe(self) -> dict:
        return {
            "mode": self.mode,
            "num_samples": self.num_samples if self.mode == "random" else None,
            "num_points": self.num_points if self.mode == "grid" else None,
            "seed": self.seed,
            "amplitude_jitter_std": self.amplitude_jitter_std,
            "phase_jitter_std": self.phase_jitter_std,
        }

    def draw(self):
        """Per-sample ``(theta, amp_k, amp_l, phase_noise)`` arrays."""
        n = self.size
        rng = np.random.Generator(np.random.PCG64(self.seed))
        if self.mode == "random":
            theta = rng.uniform(0.0, 2.0 * math.pi, n)
        else:
            theta = 2.0 * math.pi * np.arange(n) / n
        amp_k = np.ones(n)
        amp_l = np.ones(n)
        jitter = np.zeros(n)
        if self.amplitude_jitter_std > 0:
            amp_k = amp_k + rng.normal(0.0, self.amplitude_jitter_std, n)
            amp_l = amp_l + rng.normal(0.0, self.amplitude_jitter_std, n)
        if self.phase_jitter_std > 0:
            jitter = rng.normal(0.0, self.phase_jitter_std, n)
        return theta, amp_k, amp_l, jitter


@dataclass(frozen=True)
class ErrorSummary:
    max_abs_error: float
    rms_error: float


@dataclass(frozen=True)
class EstimateReport:
    estimate: CorrelationMatrix = field(repr=False)
    reference: CorrelationMatrix = field(repr=False)
    max_abs_error: float
    rms_error: float
    plan: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "plan": self.plan,
            "max_abs_error": self.max_abs_error,
            "rms_error": self.rms_error,
            "estimate": self.estimate.sidecar(),
            "reference": self.reference.sidecar(),
        }


def estimator_error(estimate: CorrelationMatrix, exact: CorrelationMatrix) -> ErrorSummary:
    if estimate.entries.shape != exact.entries.shape:
        raise InvalidArgumentError(f"shape mismatch: {estimate.entries.shape} vs {exact.entries.shape}")
    diff = estimate.entries - exact.entries
    return ErrorSummary(float(np.abs(diff).max()), float(np.sqrt(np.mean(diff**2))))


def _output_intensities(U, k, l, theta, amp_k, amp_l):
    a, b = U.entries[:, k], U.entries[:, l]
    out = amp_k[:, None] * a[None, :] + (amp_l * np.exp(1j * theta))[:, None] * b[None, :]
    return np.abs(out) ** 2


def _symmetric(m):
    return 0.5 * (m + m.T)


def _check_pair(U, k, l):
    if k == l:
        raise InvalidArgumentError("classical estimation needs two distinct input guides (k != l)")
    for idx in (k, l):
        if int(idx) != idx or not 0 <= idx < U.dim:
            raise InvalidArgumentError(f"site index {idx!r} out of range for {U.dim} sites")


def _report(estimate, exact, plan_doc):
    err = estimator_error(estimate, exact)
    return EstimateReport(estimate, exact, err.max_abs_error, err.rms_error, plan_doc)


def classical_estimate_separable(U: EvolutionOperator, k: int, l: int, plan: PhasePlan) -> EstimateReport:
    """Phase-averaged intensity correlations minus single-guide products.

    On a grid of ``P >= 3`` phases without jitter this reproduces the exact
    separable-boson map to rounding; random phases converge as ``M**-0.5``.
    """
    _check_pair(U, k, l)
    if plan.mode == "grid" and plan.num_points < 3:
        raise InvalidPlanError(f"separable estimation needs a grid of at least 3 phases, got {plan.num_points}")
    theta, amp_k, amp_l, jitter = plan.draw()
    intens = _output_intensities(U, k, l, theta + jitter, amp_k, amp_l)
    mean_product = _symmetric(intens.T @ intens) / theta.size
    ik = np.abs(U.entries[:, k]) ** 2
    il = np.abs(U.entries[:, l]) ** 2
    gamma = mean_product - np.outer(ik, ik) - np.outer(il, il)
    meta = {"k": int(k), "l": int(l), "z": U.z, "C1": U.base_coupling, "estimator": "separable"}
    estimate = CorrelationMatrix(_symmetric(gamma), Provenance.CLASSICAL_ESTIMATE, metadata=meta)
    return _report(estimate, correlation_boson_separable(U, k, l), plan.describe())


def classical_estimate_noon(
    U: EvolutionOperator, k: int, l: int, sign: int, grid_points: int, plan: Optional[PhasePlan] = None
) -> EstimateReport:
    """Second-harmonic extraction over ``grid_points`` controlled phases.

    ``plan`` may supply jitter for the grid; its point count must equal
    ``grid_points``. Fewer than 5 points alias the second harmonic.
    """
    _check_pair(U, k, l)
    if sign not in (1, -1):
        raise InvalidArgumentError(f"sign must be +1 or -1, got {sign!r}")
    if int(grid_points) != grid_points or grid_points < 5:
        raise InvalidPlanError(
            f"N00N estimation needs at least 5 controlled phases, got {grid_points}: "
            "the second harmonic aliases onto lower harmonics"
        )
    if plan is None:
        plan = PhasePlan.uniform_grid(int(grid_points))
    elif plan.mode != "grid" or plan.num_points != grid_points:
        raise InvalidPlanError("N00N estimation needs a grid plan with the requested number of points")
    theta, amp_k, amp_l, jitter = plan.draw()
    intens = _output_intensities(U, k, l, theta + jitter, amp_k, amp_l)
    weights = np.exp(-2j * theta)
    c2 = (intens * weights[:, None]).T @ intens / theta.size
    ik = np.abs(U.entries[:, k]) ** 2
    il = np.abs(U.entries[:, l]) ** 2
    gamma = np.outer(ik, ik) + np.outer(il, il) + 2.0 * sign * _symmetric(c2.real)
    meta = {"k": int(k), "l": int(l), "sign": int(sign), "z": U.z, "C1": U.base_coupling, "estimator": "noon"}
    estimate = CorrelationMatrix(gamma, Provenance.CLASSICAL_ESTIMATE, metadata=meta)
    return _report(estimate, correlation_noon(U, k, l, sign), plan.describe())
