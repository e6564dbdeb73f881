"""Coupling profiles, coupling matrices and the fabrication geometry of a
Glauber-Fock waveguide lattice.

Conventions
-----------
Sites are 0-based, ``n = 0 .. N-1``. The coupling ``C_n`` joins sites ``n-1``
and ``n``, so ``profile.couplings[n - 1]`` holds ``C_n``. Couplings are in
cm^-1, separations and positions in micrometres.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InfeasibleGeometryError, InvalidArgumentError

#: Largest nearest-neighbour coupling reported for laser-written arrays, cm^-1.
DEFAULT_MAX_COUPLING = 5.5


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CouplingProfile:
    """Nearest-neighbour couplings ``C_1 .. C_{N-1}`` of an N-site lattice."""

    n_sites: int
    base_coupling: float
    couplings: np.ndarray = field(repr=False)

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise InvalidArgumentError(f"n_sites must be a positive integer, got {self.n_sites!r}")
        if not self.base_coupling > 0:
            raise InvalidArgumentError(f"base_coupling must be > 0, got {self.base_coupling!r}")
        couplings = _frozen(self.couplings)
        if couplings.shape != (self.n_sites - 1,):
            raise InvalidArgumentError(
                f"expected {self.n_sites - 1} couplings for {self.n_sites} sites, got shape {couplings.shape}"
            )
        if not np.all(np.isfinite(couplings)) or np.any(couplings <= 0):
            raise InvalidArgumentError("all couplings must be finite and strictly positive")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        object.__setattr__(self, "base_coupling", float(self.base_coupling))
        object.__setattr__(self, "couplings", couplings)

    def __eq__(self, other):
        if not isinstance(other, CouplingProfile):
            return NotImplemented
        return (
            self.n_sites == other.n_sites
            and self.base_coupling == other.base_coupling
            and np.array_equal(self.couplings, other.couplings)
        )

    __hash__ = None

    @property
    def max_coupling(self) -> float:
        return float(self.couplings.max()) if self.couplings.size else 0.0


@dataclass(frozen=True)
class CouplingMatrix:
    """Real symmetric tridiagonal coupling matrix with zero diagonal."""

    profile: CouplingProfile

    @property
    def dim(self) -> int:
        return self.profile.n_sites

    @property
    def off_diagonal(self) -> np.ndarray:
        return self.profile.couplings

    @property
    def entries(self) -> np.ndarray:
        c = self.profile.couplings
        return np.diag(c, 1) + np.diag(c, -1)


@dataclass(frozen=True)
class Calibration:
    """Fit parameters of the exponential coupling-versus-distance law.

    ``C(d) = base_coupling * exp(-(d - d1) / kappa)``; the wavelength is
    carried as metadata only.
    """

    d1: float
    kappa: float
    base_coupling: float
    wavelength: Optional[float] = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidArgumentError(f"kappa must be > 0, got {self.kappa!r}")
        if not self.base_coupling > 0:
            raise InvalidArgumentError(f"base_coupling must be > 0, got {self.base_coupling!r}")


#: Calibrations measured for the fused-silica lattices at 633 nm and 800 nm.
CALIBRATIONS = {
    "633": Calibration(d1=23.0, kappa=5.5, base_coupling=0.37, wavelength=633.0),
    "800": Calibration(d1=34.0, kappa=10.7, base_coupling=0.36, wavelength=800.0),
}


@dataclass(frozen=True)
class GeometrySpec:
    """Waveguide separations and absolute transverse positions (site 0 at 0 µm)."""

    separations: np.ndarray = field(repr=False)
    positions: np.ndarray = field(repr=False)

    def __post_init__(self):
        seps = _frozen(self.separations)
        pos = _frozen(self.positions)
        if pos.shape != (seps.size + 1,):
            raise InvalidArgumentError("positions must have one more entry than separations")
        if np.any(np.diff(pos) <= 0):
            raise InvalidArgumentError("positions must be strictly increasing")
        if not np.allclose(np.diff(pos), seps, rtol=1e-12, atol=1e-12):
            raise InvalidArgumentError("separations must equal consecutive position differences")
        object.__setattr__(self, "separations", seps)
        object.__setattr__(self, "positions", pos)

    @classmethod
    def from_separations(cls, separations) -> "GeometrySpec":
        seps = np.asarray(separations, dtype=float)
        return cls(separations=seps, positions=np.concatenate(([0.0], np.cumsum(seps))))

    @property
    def n_sites(self) -> int:
        return self.positions.size


@dataclass(frozen=True)
class FabricationReport:
    feasible: bool
    max_site: int
    max_coupling: float
    limit: float


def build_glauber_fock_profile(n_sites: int, base_coupling: float) -> CouplingProfile:
    """Square-root coupling profile ``C_n = base_coupling * sqrt(n)``.

    >>> build_glauber_fock_profile(3, 1.0).couplings.tolist()
    [1.0, 1.4142135623730951]
    """
    if int(n_sites) != n_sites or n_sites < 1:
        raise InvalidArgumentError(f"n_sites must be a positive integer, got {n_sites!r}")
    if not base_coupling > 0:
        raise InvalidArgumentError(f"base_coupling must be > 0, got {base_coupling!r}")
    n = np.arange(1, int(n_sites), dtype=float)
    return CouplingProfile(int(n_sites), base_coupling, base_coupling * np.sqrt(n))


def build_power_law_profile(n_sites: int, base_coupling: float, epsilon: float) -> CouplingProfile:
    """Perturbed profile ``C_n = base_coupling * n**((1 + epsilon) / 2)``.

    ``epsilon > 0`` makes the coupling grow faster than ``sqrt(n)``, which
    broadens the output distribution. ``epsilon = 0`` is the Glauber-Fock case.
    """
    if int(n_sites) != n_sites or n_sites < 1:
        raise InvalidArgumentError(f"n_sites must be a positive integer, got {n_sites!r}")
    if not base_coupling > 0:
        raise InvalidArgumentError(f"base_coupling must be > 0, got {base_coupling!r}")
    n = np.arange(1, int(n_sites), dtype=float)
    return CouplingProfile(int(n_sites), base_coupling, base_coupling * n ** ((1.0 + epsilon) / 2.0))


def coupling_matrix(profile: CouplingProfile) -> CouplingMatrix:
    return CouplingMatrix(profile)


def design_geometry(profile: CouplingProfile, cal: Calibration) -> GeometrySpec:
    """Separations ``d_n = d1 - kappa * ln(C_n / C1)`` realising ``profile``.

    Raises
    ------
    InfeasibleGeometryError
        If any separation would be zero or negative; ``err.site`` is the
        1-based coupling index ``n`` of the first offending link.
    """
    seps = cal.d1 - cal.kappa * np.log(profile.couplings / cal.base_coupling)
    bad = np.flatnonzero(~(seps > 0))
    if bad.size:
        n = int(bad[0]) + 1
        raise InfeasibleGeometryError(
            f"coupling C_{n} = {profile.couplings[bad[0]]:.6g} cm^-1 needs separation "
            f"{seps[bad[0]]:.6g} um (between sites {n - 1} and {n}); must be positive",
            site=n,
        )
    return GeometrySpec.from_separations(seps)


def couplings_from_geometry(geom: GeometrySpec, cal: Calibration) -> CouplingProfile:
    """Invert the exponential law: ``C_n = C1 * exp(-(d_n - d1) / kappa)``."""
    couplings = cal.base_coupling * np.exp(-(geom.separations - cal.d1) / cal.kappa)
    return CouplingProfile(geom.n_sites, cal.base_coupling, couplings)


def validate_fabrication(profile: CouplingProfile, max_coupling: float = DEFAULT_MAX_COUPLING) -> FabricationReport:
    """Check the profile's largest coupling against a fabrication limit.

    ``max_site`` is the largest lattice size N for which the square-root
    profile with the same ``C1`` keeps ``C1 * sqrt(N - 1) <= max_coupling``.
    """
    if not max_coupling > 0:
        raise InvalidArgumentError(f"max_coupling must be > 0, got {max_coupling!r}")
    c1 = profile.base_coupling
    max_site = math.floor((max_coupling / c1) ** 2) + 1
    # guard the floor against rounding in the squared ratio
    while c1 * math.sqrt(max_site - 1) > max_coupling:
        max_site -= 1
    while c1 * math.sqrt(max_site) <= max_coupling:
        max_site += 1
    return FabricationReport(
        feasible=bool(profile.max_coupling <= max_coupling),
        max_site=max_site,
        max_coupling=profile.max_coupling,
        limit=float(max_coupling),
    )


# -- flat JSON document -------------------------------------------------------


def lattice_to_dict(
    profile: Optional[CouplingProfile] = None,
    calibration: Optional[Calibration] = None,
    geometry: Optional[GeometrySpec] = None,
) -> dict:
    """Flatten any combination of profile, calibration and geometry into one dict.

    Key names are documented in ``docs/schema.md``.
    """
    doc = {}
    if profile is not None:
        doc["n_sites"] = profile.n_sites
        doc["base_coupling"] = profile.base_coupling
        doc["couplings"] = profile.couplings.tolist()
    if calibration is not None:
        doc["d1"] = calibration.d1
        doc["kappa"] = calibration.kappa
        doc["wavelength"] = calibration.wavelength
        doc.setdefault("base_coupling", calibration.base_coupling)
    if geometry is not None:
        doc["n_sites"] = geometry.n_sites
        doc["separations"] = geometry.separations.tolist()
        doc["positions"] = geometry.positions.tolist()
    return doc


def lattice_from_dict(doc: dict):
    """Inverse of :func:`lattice_to_dict`.

    Returns ``(profile, calibration, geometry)``; entries missing from the
    document come back as ``None``.
    """
    profile = calibration = geometry = None
    try:
        if "couplings" in doc:
            profile = CouplingProfile(int(doc["n_sites"]), float(doc["base_coupling"]), doc["couplings"])
        if "d1" in doc and "kappa" in doc:
            calibration = Calibration(
                d1=float(doc["d1"]),
                kappa=float(doc["kappa"]),
                base_coupling=float(doc["base_coupling"]),
                wavelength=doc.get("wavelength"),
            )
        if "separations" in doc:
            geometry = GeometrySpec.from_separations(doc["separations"])
            if "n_sites" in doc and int(doc["n_sites"]) != geometry.n_sites:
                raise InvalidArgumentError("n_sites disagrees with the number of separations")
    except KeyError as exc:
        raise InvalidArgumentError(f"lattice document is missing key {exc}") from None
    return profile, calibration, geometry


def load_lattice(path) -> tuple:
    with open(path) as fh:
        return lattice_from_dict(json.load(fh))


def save_lattice(path, profile=None, calibration=None, geometry=None) -> Path:
    from .io import write_json

    return write_json(path, lattice_to_dict(profile, calibration, geometry))
