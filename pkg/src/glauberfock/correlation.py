"""Exact two-particle correlation maps ``Gamma_qr`` after propagation.

All maps are built from two columns of the evolution operator,
``a = U[:, k]`` and ``b = U[:, l]``:

* separable bosons  ``|a_q b_r + b_q a_r|^2 / (1 + delta_kl)``
* N00N pair (+/-)   ``|a_q a_r +/- b_q b_r|^2``
* fermions          ``|a_q b_r - b_q a_r|^2``

Each raw map sums to 2 over all ``(q, r)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError
from .propagation import EvolutionOperator


class Provenance(str, enum.Enum):
    EXACT_BOSON = "ExactBoson"
    EXACT_NOON_PLUS = "ExactNoonPlus"
    EXACT_NOON_MINUS = "ExactNoonMinus"
    EXACT_FERMION = "ExactFermion"
    CLASSICAL_ESTIMATE = "ClassicalEstimate"


class Normalization(str, enum.Enum):
    RAW = "Raw"
    PEAK = "PeakNormalized"


class StateKind(str, enum.Enum):
    SINGLE = "single"
    BOSON = "boson"
    NOON_PLUS = "noon+"
    NOON_MINUS = "noon-"
    FERMION = "fermion"


@dataclass(frozen=True)
class InputState:
    """Which guides are excited, and with what kind of two-particle state."""

    kind: StateKind
    k: int
    l: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", StateKind(self.kind))
        if self.kind is StateKind.SINGLE:
            if self.l is not None:
                raise InvalidArgumentError("a single-site input takes one index")
        elif self.l is None:
            raise InvalidArgumentError(f"{self.kind.value} input needs two site indices")
        elif self.kind is not StateKind.BOSON and self.k == self.l:
            raise InvalidArgumentError(f"{self.kind.value} input requires k != l")
        for idx in (self.k, self.l):
            if idx is not None and (int(idx) != idx or idx < 0):
                raise InvalidArgumentError(f"site index must be a non-negative integer, got {idx!r}")

    @classmethod
    def single(cls, k):
        return cls(StateKind.SINGLE, k)

    @classmethod
    def separable(cls, k, l):
        return cls(StateKind.BOSON, k, l)

    @classmethod
    def noon(cls, k, l, sign):
        if sign not in (1, -1):
            raise InvalidArgumentError(f"sign must be +1 or -1, got {sign!r}")
        return cls(StateKind.NOON_PLUS if sign > 0 else StateKind.NOON_MINUS, k, l)

    @classmethod
    def fermion(cls, k, l):
        return cls(StateKind.FERMION, k, l)

    @property
    def sign(self) -> Optional[int]:
        return {StateKind.NOON_PLUS: 1, StateKind.NOON_MINUS: -1}.get(self.kind)

    @property
    def is_pair(self) -> bool:
        return self.kind is not StateKind.SINGLE


@dataclass(frozen=True)
class CorrelationMatrix:
    entries: np.ndarray = field(repr=False)
    provenance: Provenance
    normalization: Normalization = Normalization.RAW
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.array(self.entries, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise InvalidArgumentError(f"correlation matrix must be square, got shape {g.shape}")
        g.setflags(write=False)
        object.__setattr__(self, "entries", g)
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        object.__setattr__(self, "normalization", Normalization(self.normalization))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def total(self) -> float:
        return float(self.entries.sum())

    def argmax(self) -> tuple:
        q, r = np.unravel_index(np.argmax(self.entries), self.entries.shape)
        return int(q), int(r)

    def sidecar(self, **extra) -> dict:
        """JSON-ready description of where this matrix came from."""
        doc = {
            "provenance": self.provenance.value,
            "normalization": self.normalization.value,
            "N": self.dim,
        }
        doc.update(self.metadata)
        doc.update(extra)
        return doc


def _columns(U: EvolutionOperator, k: int, l: int):
    for idx in (k, l):
        if int(idx) != idx or not 0 <= idx < U.dim:
            raise InvalidArgumentError(f"site index {idx!r} out of range for {U.dim} sites")
    return U.entries[:, k], U.entries[:, l]


def _coincidences(amp):
    gamma = np.abs(amp) ** 2
    # mirror one triangle: vectorised complex products are not bitwise commutative
    return np.triu(gamma) + np.triu(gamma, 1).T


def _meta(U, k, l, sign=None):
    meta = {"k": int(k), "l": int(l), "z": U.z, "C1": U.base_coupling}
    if sign is not None:
        meta["sign"] = int(sign)
    return meta


def correlation_boson_separable(U: EvolutionOperator, k: int, l: int) -> CorrelationMatrix:
    a, b = _columns(U, k, l)
    amp = np.outer(a, b) + np.outer(b, a)
    gamma = _coincidences(amp)
    if k == l:
        gamma /= 2.0
    return CorrelationMatrix(gamma, Provenance.EXACT_BOSON, metadata=_meta(U, k, l))


def correlation_noon(U: EvolutionOperator, k: int, l: int, sign: int) -> CorrelationMatrix:
    if sign not in (1, -1):
        raise InvalidArgumentError(f"sign must be +1 or -1, got {sign!r}")
    if k == l:
        raise InvalidArgumentError("a N00N pair needs two distinct guides (k != l)")
    a, b = _columns(U, k, l)
    amp = np.outer(a, a) + sign * np.outer(b, b)
    prov = Provenance.EXACT_NOON_PLUS if sign > 0 else Provenance.EXACT_NOON_MINUS
    return CorrelationMatrix(_coincidences(amp), prov, metadata=_meta(U, k, l, sign))


def correlation_fermion(U: EvolutionOperator, k: int, l: int) -> CorrelationMatrix:
    if k == l:
        raise InvalidArgumentError("two fermions cannot start in the same guide (k != l)")
    a, b = _columns(U, k, l)
    amp = np.outer(a, b) - np.outer(b, a)
    return CorrelationMatrix(_coincidences(amp), Provenance.EXACT_FERMION, metadata=_meta(U, k, l))


def correlation_for(U: EvolutionOperator, state: InputState) -> CorrelationMatrix:
    """Dispatch on the kind of two-particle input."""
    if state.kind is StateKind.BOSON:
        return correlation_boson_separable(U, state.k, state.l)
    if state.kind is StateKind.FERMION:
        return correlation_fermion(U, state.k, state.l)
    if state.sign is not None:
        return correlation_noon(U, state.k, state.l, state.sign)
    raise InvalidArgumentError("correlation maps need a two-particle input")


def single_particle_distribution(U: EvolutionOperator, k: int) -> np.ndarray:
    return np.abs(U.column(k)) ** 2


def peak_normalize(gamma: CorrelationMatrix) -> CorrelationMatrix:
    peak = float(gamma.entries.max())
    if not peak > 0:
        raise InvalidArgumentError("cannot peak-normalise a matrix without a positive entry")
    return replace(gamma, entries=gamma.entries / peak, normalization=Normalization.PEAK)
