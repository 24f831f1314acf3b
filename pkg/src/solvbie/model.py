"""Core records: point charges, dielectric pairs, sphere models, energies.

Unit conventions used throughout the package:

* lengths in Angstrom, charges in elementary charge units e,
* dielectric constants dimensionless,
* energies in kcal/mol, obtained by applying the Coulomb constant
  ``COULOMB_KCAL`` exactly once at energy assembly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EmptyInputError, ParseError

#: Coulomb constant, kcal mol^-1 Angstrom e^-2 (CHARMM convention).
COULOMB_KCAL = 332.0636


@dataclass(frozen=True)
class Charge:
    """A point charge: position in Angstrom, magnitude in e."""

    position: tuple[float, float, float]
    magnitude: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.position):
            raise DomainError(f"non-finite charge position {self.position}")
        if not math.isfinite(self.magnitude):
            raise DomainError(f"non-finite charge magnitude {self.magnitude}")

    @property
    def radius(self) -> float:
        """Distance from the coordinate origin (the cavity center)."""
        x, y, z = self.position
        return math.sqrt(x * x + y * y + z * z)


@dataclass(frozen=True)
class ChargeDistribution:
    """An ordered, non-empty collection of point charges."""

    charges: tuple[Charge, ...]
    label: str = ""
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.charges) == 0:
            raise EmptyInputError("charge distribution must contain at least one charge")

    def __len__(self) -> int:
        return len(self.charges)

    def positions(self) -> np.ndarray:
        """(Q, 3) array of charge positions."""
        return np.array([c.position for c in self.charges], dtype=float)

    def magnitudes(self) -> np.ndarray:
        """(Q,) array of charge magnitudes."""
        return np.array([c.magnitude for c in self.charges], dtype=float)


def make_distribution(positions, magnitudes, label: str = "") -> ChargeDistribution:
    """Build a ChargeDistribution from array-like positions and magnitudes."""
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    magnitudes = np.asarray(magnitudes, dtype=float).ravel()
    if positions.shape[0] != magnitudes.shape[0]:
        raise DomainError(
            f"{positions.shape[0]} positions but {magnitudes.shape[0]} magnitudes"
        )
    charges = tuple(
        Charge(tuple(p), float(q)) for p, q in zip(positions, magnitudes)
    )
    return ChargeDistribution(charges=charges, label=label)


@dataclass(frozen=True)
class DielectricPair:
    """Interior/exterior dielectric constants of the two-region model."""

    eps_in: float
    eps_out: float

    def __post_init__(self):
        if not (self.eps_in > 0 and self.eps_out > 0):
            raise DomainError(
                f"dielectric constants must be positive, got "
                f"eps_in={self.eps_in}, eps_out={self.eps_out}"
            )

    @property
    def eps_hat(self) -> float:
        """Dielectric contrast (eps_in - eps_out) / ((eps_in + eps_out)/2).

        Always in (-2, 2) for positive dielectrics.
        """
        return (self.eps_in - self.eps_out) / (0.5 * (self.eps_in + self.eps_out))


@dataclass(frozen=True)
class SphereModel:
    """Spherical cavity of radius b with a dielectric pair and series cutoff."""

    radius: float
    dielectrics: DielectricPair
    n_max: int = 25

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"sphere radius must be positive, got {self.radius}")
        if self.n_max < 0:
            raise DomainError(f"n_max must be >= 0, got {self.n_max}")


@dataclass(frozen=True)
class EnergyResult:
    """A solvation free energy in kcal/mol, tagged with the producing method."""

    value: float
    method: str
    truncation_error_estimate: float | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DomainError(f"non-finite energy {self.value} for method {self.method}")
        if self.truncation_error_estimate is not None and self.truncation_error_estimate < 0:
            raise DomainError("truncation error estimate must be nonnegative")


def net_charge(dist: ChargeDistribution) -> float:
    """Sum of charge magnitudes (signed), in e."""
    return float(math.fsum(c.magnitude for c in dist.charges))


def load_pqr(path) -> ChargeDistribution:
    """Read point charges from a PQR file.

    Both whitespace-aligned and free-form PQR dialects are tolerated; the
    chain field may be present or absent.  For each ATOM/HETATM record the
    last two numeric fields are taken as charge and radius, and the three
    fields before them as x, y, z.  Radii are not used for any surface
    construction; per-atom radii are kept in the distribution metadata.
    """
    charges = []
    radii = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields or fields[0] not in ("ATOM", "HETATM"):
                continue
            if len(fields) < 7:
                raise ParseError(f"{path}:{lineno}: too few fields in PQR record")
            try:
                x, y, z, q, r = (float(v) for v in fields[-5:])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: non-numeric field ({exc})") from None
            charges.append(Charge((x, y, z), q))
            radii.append(r)
    if not charges:
        raise EmptyInputError(f"{path}: no ATOM/HETATM records found")
    dist = ChargeDistribution(charges=tuple(charges), label=str(path))
    dist.metadata["pqr_radii"] = radii
    return dist
