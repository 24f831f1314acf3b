"""Analytic solvation-energy models for charges in a spherical cavity.

Implements the exact Kirkwood series, the boundary-integral-based
approximations (CFA, P, generic-lambda, and the hybrid M variant), and the
Generalized Born / GB-epsilon estimators with sphere-analytic parameters.

All per-mode reaction coefficients are elementwise rescalings of the source
moments E_nm:

    exact:  B_nm = (eps1-eps2)(n+1) / (eps1 (eps1 n + eps2 (n+1)) b^(2n+1)) E_nm
    CFA:    B_nm = (eps1-eps2)(n+1) / (eps1 eps2 (2n+1) b^(2n+1)) E_nm
    P:      B_nm = 2 (eps1-eps2)(n+1) / (eps1 (eps1+eps2)(2n+1) b^(2n+1)) E_nm
    lambda: B_nm = B^P_nm / (1 + eps_hat * lambda)
    M:      CFA factor at n = 0, lambda factor for n >= 1
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .harmonics import (
    KIND_REACTION,
    KIND_SOURCE,
    MultipoleCoefficients,
    eval_interior_potential_many,
    source_moments,
    truncation_tail_estimate,
)
from .model import (
    COULOMB_KCAL,
    ChargeDistribution,
    DielectricPair,
    EnergyResult,
    SphereModel,
)

VARIANT_CFA = "cfa"
VARIANT_P = "p"
VARIANT_LAMBDA = "lambda"
VARIANT_M = "m"

#: Fraction of the sphere radius beyond which charges are rejected.
BOUNDARY_MARGIN = 0.999


@dataclass(frozen=True)
class BibeeVariant:
    """A diagonal approximation of the boundary-integral operator.

    ``lam`` is the eigenvalue estimate used to scale the operator; it must
    lie in [-1/2, 0], the spectral range of the sphere's electric-field
    operator.  CFA is equivalent to lambda = -1/2 and P to lambda = 0.
    """

    tag: str
    lam: float = 0.0

    def __post_init__(self):
        if self.tag not in (VARIANT_CFA, VARIANT_P, VARIANT_LAMBDA, VARIANT_M):
            raise DomainError(f"unknown variant tag {self.tag!r}")
        if self.tag in (VARIANT_LAMBDA, VARIANT_M) and not (-0.5 <= self.lam <= 0.0):
            raise DomainError(f"lambda must lie in [-1/2, 0], got {self.lam}")

    @classmethod
    def cfa(cls) -> "BibeeVariant":
        return cls(VARIANT_CFA, -0.5)

    @classmethod
    def p(cls) -> "BibeeVariant":
        return cls(VARIANT_P, 0.0)

    @classmethod
    def generic(cls, lam: float) -> "BibeeVariant":
        return cls(VARIANT_LAMBDA, lam)

    @classmethod
    def hybrid(cls, lam: float = 0.0) -> "BibeeVariant":
        return cls(VARIANT_M, lam)

    def method_name(self) -> str:
        if self.tag == VARIANT_CFA:
            return "CFA"
        if self.tag == VARIANT_P:
            return "P"
        if self.tag == VARIANT_LAMBDA:
            return f"Lambda({self.lam:g})"
        return f"M({self.lam:g})"


@dataclass(frozen=True)
class GBParameters:
    """Generalized-Born parameters: electrostatic radius, effective radii, alpha."""

    electrostatic_radius: float
    effective_radii: tuple[float, ...]
    alpha: float = 0.57

    def __post_init__(self):
        a = self.electrostatic_radius
        if not a > 0:
            raise DomainError(f"electrostatic radius must be positive, got {a}")
        for r in self.effective_radii:
            if not (0 < r <= a * (1 + 1e-12)):
                raise DomainError(f"effective radius {r} outside (0, {a}]")
        if not (0.0 <= self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha}")


def _exact_factors(model: SphereModel) -> np.ndarray:
    e1, e2 = model.dielectrics.eps_in, model.dielectrics.eps_out
    n = np.arange(model.n_max + 1, dtype=float)
    bpow = model.radius ** (2 * n + 1)
    return (e1 - e2) * (n + 1) / (e1 * (e1 * n + e2 * (n + 1)) * bpow)


def _p_factors(model: SphereModel) -> np.ndarray:
    e1, e2 = model.dielectrics.eps_in, model.dielectrics.eps_out
    n = np.arange(model.n_max + 1, dtype=float)
    bpow = model.radius ** (2 * n + 1)
    return 2.0 * (e1 - e2) * (n + 1) / (e1 * (e1 + e2) * (2 * n + 1) * bpow)


def _cfa_factors(model: SphereModel) -> np.ndarray:
    e1, e2 = model.dielectrics.eps_in, model.dielectrics.eps_out
    n = np.arange(model.n_max + 1, dtype=float)
    bpow = model.radius ** (2 * n + 1)
    return (e1 - e2) * (n + 1) / (e1 * e2 * (2 * n + 1) * bpow)


def _scale_moments(e: MultipoleCoefficients, factors: np.ndarray) -> MultipoleCoefficients:
    coeffs = e.coeffs * factors[:, None]
    return MultipoleCoefficients(n_max=e.n_max, coeffs=coeffs, kind=KIND_REACTION)


def kirkwood_reaction_coefficients(
    e: MultipoleCoefficients, model: SphereModel
) -> MultipoleCoefficients:
    """Exact reaction-field coefficients B_nm from source moments E_nm."""
    _check_source(e, model)
    return _scale_moments(e, _exact_factors(model))


def bibee_reaction_coefficients(
    e: MultipoleCoefficients,
    model: SphereModel,
    variant: BibeeVariant,
    lambda_per_mode: np.ndarray | None = None,
) -> MultipoleCoefficients:
    """Approximate reaction coefficients for a diagonal operator approximation.

    ``lambda_per_mode`` (testing only) overrides the scale factor mode by
    mode for the lambda variant; the exact-recovery values are
    lambda_n = -1/(2(2n+1)).
    """
    _check_source(e, model)
    eps_hat = model.dielectrics.eps_hat
    p = _p_factors(model)
    if variant.tag == VARIANT_CFA:
        factors = _cfa_factors(model)
    elif variant.tag == VARIANT_P:
        factors = p
    elif variant.tag == VARIANT_LAMBDA:
        lam = np.asarray(
            variant.lam if lambda_per_mode is None else lambda_per_mode, dtype=float
        )
        denom = 1.0 + eps_hat * lam
        if np.any(denom <= 0):
            raise DomainError("degenerate scale: 1 + eps_hat*lambda <= 0")
        factors = p / denom
    else:  # hybrid M
        denom = 1.0 + eps_hat * variant.lam
        if denom <= 0:
            raise DomainError("degenerate scale: 1 + eps_hat*lambda <= 0")
        factors = p / denom
        factors[0] = _cfa_factors(model)[0]
    return _scale_moments(e, factors)


def _check_source(e: MultipoleCoefficients, model: SphereModel):
    if e.kind != KIND_SOURCE:
        raise DomainError("expected source moments")
    if e.n_max != model.n_max:
        raise DomainError(f"moment cutoff {e.n_max} != model cutoff {model.n_max}")


def _check_interior(dist: ChargeDistribution, model: SphereModel):
    r = np.linalg.norm(dist.positions(), axis=1)
    if np.any(r > BOUNDARY_MARGIN * model.radius):
        raise DomainError(
            f"charge at |r| = {float(np.max(r)):g} too close to the boundary "
            f"(limit {BOUNDARY_MARGIN} * b = {BOUNDARY_MARGIN * model.radius:g})"
        )


def solvation_energy(
    b_coeffs: MultipoleCoefficients,
    dist: ChargeDistribution,
    model: SphereModel,
    method: str = "Kirkwood",
) -> EnergyResult:
    """Solvation free energy (k_e/2) sum_k q_k psi(r_k) in kcal/mol."""
    _check_interior(dist, model)
    psi = eval_interior_potential_many(b_coeffs, dist.positions())
    value = 0.5 * COULOMB_KCAL * float(np.dot(dist.magnitudes(), psi))
    tail = truncation_tail_estimate(dist, model.radius, model.n_max)
    return EnergyResult(value=value, method=method, truncation_error_estimate=tail)


def kirkwood_energy(dist: ChargeDistribution, model: SphereModel) -> EnergyResult:
    """Exact series solvation energy for the sphere."""
    e = source_moments(dist, model.n_max)
    b = kirkwood_reaction_coefficients(e, model)
    return solvation_energy(b, dist, model, method="Kirkwood")


def bibee_energy(
    dist: ChargeDistribution, model: SphereModel, variant: BibeeVariant
) -> EnergyResult:
    """Approximate solvation energy for a diagonal-approximation variant."""
    e = source_moments(dist, model.n_max)
    b = bibee_reaction_coefficients(e, model, variant)
    return solvation_energy(b, dist, model, method=variant.method_name())


def mode_ratio(variant: BibeeVariant, n: int) -> float:
    """Approximate/exact coefficient ratio for mode n in the eps1/eps2 -> 0 limit.

    CFA: (n+1)/(2n+1); P: (n+1)/(n+1/2); lambda: the P ratio divided by
    (1 - 2*lambda) (the eps_hat -> -2 limit of 1 + eps_hat*lambda).  The M
    hybrid uses the CFA ratio at n = 0 (exact there) and the lambda ratio
    for n >= 1.
    """
    if n < 0:
        raise DomainError(f"mode index must be >= 0, got {n}")
    if variant.tag == VARIANT_CFA:
        return (n + 1) / (2 * n + 1)
    if variant.tag == VARIANT_P:
        return (n + 1) / (n + 0.5)
    if variant.tag == VARIANT_M and n == 0:
        return 1.0
    return (n + 1) / ((n + 0.5) * (1.0 - 2.0 * variant.lam))


def pair_interaction_kirkwood(i_pos, i_q, j_pos, j_q, model: SphereModel) -> float:
    """Reaction-field interaction energy of an ordered charge pair, kcal/mol.

    dG_ij = -k_e q_i q_j (1 - eps1/eps2) / (A eps1)
            * sum_l t^l P_l(cos gamma) / (1 + (l/(l+1)) eps1/eps2)

    with t = |r_i||r_j|/A^2.  Summing (1/2) dG_ij over all ordered pairs
    (including i = j self terms) reproduces the full Kirkwood energy.
    """
    e1, e2 = model.dielectrics.eps_in, model.dielectrics.eps_out
    a = model.radius
    ri = np.asarray(i_pos, dtype=float)
    rj = np.asarray(j_pos, dtype=float)
    rin, rjn = float(np.linalg.norm(ri)), float(np.linalg.norm(rj))
    t = rin * rjn / (a * a)
    if t >= 1.0:
        raise DomainError(f"pair separation parameter t = {t} >= 1")
    if t == 0.0:
        cos_gamma = 1.0  # angle irrelevant: only l = 0 survives
    else:
        cos_gamma = float(np.dot(ri, rj) / (rin * rjn)) if rin > 0 and rjn > 0 else 1.0
        cos_gamma = min(1.0, max(-1.0, cos_gamma))
    beta = e1 / e2
    ls = np.arange(model.n_max + 1, dtype=float)
    # Legendre polynomials P_l(cos_gamma) by upward recurrence.
    pl = np.empty(model.n_max + 1)
    pl[0] = 1.0
    if model.n_max >= 1:
        pl[1] = cos_gamma
        for l in range(2, model.n_max + 1):
            pl[l] = ((2 * l - 1) * cos_gamma * pl[l - 1] - (l - 1) * pl[l - 2]) / l
    series = float(np.sum(t ** ls * pl / (1.0 + ls / (ls + 1.0) * beta)))
    return -COULOMB_KCAL * i_q * j_q * (1.0 - beta) / (a * e1) * series


def pairwise_kirkwood_energy(dist: ChargeDistribution, model: SphereModel) -> float:
    """Total energy assembled from the pairwise series, kcal/mol."""
    pos = dist.positions()
    q = dist.magnitudes()
    total = 0.0
    for i in range(len(q)):
        for j in range(len(q)):
            total += 0.5 * pair_interaction_kirkwood(pos[i], q[i], pos[j], q[j], model)
    return total


def sphere_gb_parameters(dist: ChargeDistribution, model: SphereModel) -> GBParameters:
    """Sphere-analytic GB parameters: A = b, R_i = b - r_i^2/b, alpha = 0.57."""
    _check_interior(dist, model)
    b = model.radius
    r = np.linalg.norm(dist.positions(), axis=1)
    radii = tuple(float(b - ri * ri / b) for ri in r)
    return GBParameters(electrostatic_radius=b, effective_radii=radii)


def still_f(r_ij: float, ri: float, rj: float) -> float:
    """Still equation f_ij = sqrt(r^2 + Ri Rj exp(-r^2 / (4 Ri Rj)))."""
    rr = ri * rj
    return math.sqrt(r_ij * r_ij + rr * math.exp(-r_ij * r_ij / (4.0 * rr)))


def _pair_distances(dist: ChargeDistribution) -> np.ndarray:
    pos = dist.positions()
    diff = pos[:, None, :] - pos[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def _still_f_matrix(dist: ChargeDistribution, radii: np.ndarray) -> np.ndarray:
    d = _pair_distances(dist)
    rr = radii[:, None] * radii[None, :]
    return np.sqrt(d * d + rr * np.exp(-d * d / (4.0 * rr)))


def gb_still_energy(
    dist: ChargeDistribution, params: GBParameters, eps: DielectricPair
) -> EnergyResult:
    """Generalized-Born energy via the Still equation, kcal/mol.

    dG = -(k_e/2) (1/eps1 - 1/eps2) sum_ij q_i q_j / f_ij, double sum over
    all ordered pairs including the diagonal (f_ii = R_i).
    """
    radii = _radii_for(dist, params)
    f = _still_f_matrix(dist, radii)
    q = dist.magnitudes()
    pref = -0.5 * COULOMB_KCAL * (1.0 / eps.eps_in - 1.0 / eps.eps_out)
    value = pref * float(q @ (1.0 / f) @ q)
    return EnergyResult(value=value, method="GB")


def gb_epsilon_energy(
    dist: ChargeDistribution, params: GBParameters, eps: DielectricPair
) -> EnergyResult:
    """GB energy with the dielectric-dependent alpha correction, kcal/mol.

    Pair term: -(k_e/2)(1/eps1 - 1/eps2) q_i q_j / (1 + alpha eps1/eps2)
               * [1/f_ij + (alpha eps1/eps2) / A].
    Collapses to the Still form when alpha = 0 or eps1/eps2 -> 0.
    """
    radii = _radii_for(dist, params)
    f = _still_f_matrix(dist, radii)
    q = dist.magnitudes()
    beta = eps.eps_in / eps.eps_out
    alpha = params.alpha
    kernel = 1.0 / f + alpha * beta / params.electrostatic_radius
    pref = -0.5 * COULOMB_KCAL * (1.0 / eps.eps_in - 1.0 / eps.eps_out) / (1.0 + alpha * beta)
    value = pref * float(q @ kernel @ q)
    return EnergyResult(value=value, method="GBeps", metadata={"alpha": str(alpha)})


def _radii_for(dist: ChargeDistribution, params: GBParameters) -> np.ndarray:
    radii = np.asarray(params.effective_radii, dtype=float)
    if radii.size != len(dist):
        raise DomainError(f"{radii.size} effective radii for {len(dist)} charges")
    return radii
