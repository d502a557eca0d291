"""Pure-contraction diagnostics for multiplication operators at truncation.

"Pure" at finite dimension means spectral radius < 1 - tol (equivalent to
adjoint powers tending to zero there).  The headline property this module
certifies: for a contractive polynomial symbol Phi, the spectral radius of
the compression of M_Phi^* to V_D agrees with rho(Phi(0)) on which side of
1 - tol it falls, for every D -- the verdict is never "inconsistent".

The compression of M_Phi^* to V_D is EXACT (V_D is invariant under M_Phi^*
because adjoint monomials lower degree), which is what makes the diagnostic
meaningful: a unimodular eigenvalue of the compression is a genuine
non-decaying vector of the full operator.

Contractivity of a symbol is certified on a padded truncation (degree
D_max + deg Phi) as a surrogate for the multiplier norm; random sweep
symbols are rescaled by 0.99 / padded-norm, which bounds every compression
norm by 0.99 since compressions nest inside the padded matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import CertificationError, InvalidInputError, NotContractiveError
from .operators import (
    OperatorMatrix,
    SubspaceFrame,
    multiplier_matrix,
    null_space_frame,
    opnorm,
    spectral_radius,
)
from .spaces import (
    BallDomain,
    Domain,
    MultiplierSymbol,
    PolydiscDomain,
    SpaceVector,
    TruncatedBasis,
    ball_basis,
    enumerate_indices,
    lift_scalar_symbol,
    polydisc_basis,
    slice_symbol,
)

__all__ = [
    "basis_for",
    "adjoint_compression",
    "decay_curve",
    "PurityReport",
    "multiplier_purity_verdict",
    "ATEstimate",
    "a_operator_estimate",
    "a_operator_monotonicity",
    "NagyFoiasSplit",
    "nagy_foias_split",
    "InvariantRestrictionReport",
    "invariant_restriction_test",
    "SliceConsistencyReport",
    "slice_purity_consistency",
    "random_contractive_symbol",
]


def basis_for(domain: Domain, degree_cap: int, coeff_dim: int) -> TruncatedBasis:
    """Build the truncated basis of a domain descriptor at the given cap."""
    if isinstance(domain, PolydiscDomain):
        return polydisc_basis(domain.factors, degree_cap, coeff_dim)
    if isinstance(domain, BallDomain):
        return ball_basis(domain.spec, degree_cap, coeff_dim)
    raise InvalidInputError(f"unknown domain {domain!r}")


def adjoint_compression(phi: MultiplierSymbol, basis: TruncatedBasis) -> OperatorMatrix:
    """The matrix of M_Phi^* restricted to V_D -- exact, with d* = D."""
    fwd = multiplier_matrix(basis, phi)
    return fwd.adjoint(exactness_degree=basis.degree_cap, lift=0)


def decay_curve(
    t: Union[OperatorMatrix, np.ndarray],
    h: Union[SpaceVector, np.ndarray],
    m_max: int,
    tol: float = 1e-10,
) -> List[float]:
    """(||T^m h||)_{m=0..m_max} for a contraction T; nonincreasing by construction."""
    a = t.data if isinstance(t, OperatorMatrix) else np.asarray(t, dtype=complex)
    norm = opnorm(a)
    if norm > 1.0 + tol:
        raise NotContractiveError(f"operator norm {norm:.12f} exceeds 1 + {tol}")
    v = (h.coords if isinstance(h, SpaceVector) else np.asarray(h, dtype=complex)).reshape(-1)
    curve = [float(np.linalg.norm(v))]
    for _ in range(m_max):
        v = a @ v
        curve.append(float(np.linalg.norm(v)))
    return curve


@dataclass
class PurityReport:
    """Per-degree spectral radii of the adjoint compression vs rho(Phi(0)).

    verdict is "pure" iff all radii (including phi0_rho) are < 1 - tol,
    "not_pure" iff phi0_rho >= 1 - tol and some per-degree radius is too,
    and "inconsistent" otherwise -- the latter must never occur.
    ``near_boundary`` flags spectra within tol of 1 (indeterminate at
    tolerance) without reclassifying them.
    """

    per_degree_rho: Dict[int, float]
    phi0_rho: float
    verdict: str
    tol: float
    padded_norm: float
    near_boundary: bool
    decay_samples: Optional[List[float]] = None


def _verdict(per_degree_rho: Dict[int, float], phi0_rho: float, tol: float) -> str:
    cutoff = 1.0 - tol
    radii = list(per_degree_rho.values())
    if phi0_rho < cutoff and all(r < cutoff for r in radii):
        return "pure"
    if phi0_rho >= cutoff and any(r >= cutoff for r in radii):
        return "not_pure"
    return "inconsistent"


def multiplier_purity_verdict(
    phi: MultiplierSymbol,
    domain: Domain,
    d_max: int,
    tol: float = 1e-8,
    check_contractive: bool = True,
    decay_m_max: Optional[int] = None,
) -> PurityReport:
    """Purity verdict for a contractive polynomial symbol on a graded family.

    ``check_contractive=False`` is reserved for degree-D jets of transfer
    functions, whose compressions are exact even though the jet polynomial
    itself need not be a contractive multiplier.
    """
    padded = basis_for(domain, d_max + phi.degree, phi.coeff_dim)
    padded_norm = opnorm(multiplier_matrix(padded, phi))
    if check_contractive and padded_norm > 1.0 + tol:
        raise NotContractiveError(
            f"padded multiplier norm {padded_norm:.12f} exceeds 1 + {tol}"
        )
    per_degree: Dict[int, float] = {}
    for d in range(d_max + 1):
        basis = basis_for(domain, d, phi.coeff_dim)
        comp = adjoint_compression(phi, basis)
        per_degree[d] = spectral_radius(comp)
    phi0_rho = spectral_radius(phi.phi0)
    verdict = _verdict(per_degree, phi0_rho, tol)
    radii = list(per_degree.values()) + [phi0_rho]
    near = any(abs(r - 1.0) <= tol for r in radii)
    decay = None
    if decay_m_max is not None:
        basis = basis_for(domain, d_max, phi.coeff_dim)
        comp = adjoint_compression(phi, basis)
        h = np.zeros(basis.dim, dtype=complex)
        h[: basis.coeff_dim] = 1.0 / math.sqrt(basis.coeff_dim)
        decay = decay_curve(comp, h, decay_m_max, tol=max(tol, 1e-10))
    return PurityReport(
        per_degree_rho=per_degree,
        phi0_rho=phi0_rho,
        verdict=verdict,
        tol=tol,
        padded_norm=padded_norm,
        near_boundary=near,
        decay_samples=decay,
    )


@dataclass
class ATEstimate:
    """T^m T^*m, the m-th term of the monotone approximation of A_T^2."""

    m: int
    matrix: np.ndarray


def a_operator_estimate(t: Union[OperatorMatrix, np.ndarray], m: int) -> ATEstimate:
    a = t.data if isinstance(t, OperatorMatrix) else np.asarray(t, dtype=complex)
    power = np.linalg.matrix_power(a, m)
    return ATEstimate(m, power @ power.conj().T)


def a_operator_monotonicity(
    t: Union[OperatorMatrix, np.ndarray], m_max: int, tol: float = 1e-10
) -> Tuple[bool, List[float]]:
    """Loewner monotonicity certificate for (T^m T^*m)_m on a contraction.

    Returns (ok, per-step minimum eigenvalues of A_m - A_{m+1}).
    """
    a = t.data if isinstance(t, OperatorMatrix) else np.asarray(t, dtype=complex)
    if opnorm(a) > 1.0 + tol:
        raise NotContractiveError("monotonicity certificate requires a contraction")
    cur = np.eye(a.shape[0], dtype=complex)
    mins: List[float] = []
    for _ in range(m_max):
        nxt = a @ cur @ a.conj().T
        diff = cur - nxt
        mins.append(float(np.min(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))
        cur = nxt
    return all(x >= -tol for x in mins), mins


@dataclass
class NagyFoiasSplit:
    """Unitary-part / pure-part splitting of a finite-dimensional contraction."""

    e0: SubspaceFrame
    e1: SubspaceFrame
    unimodular_eigenvalues: Tuple[complex, ...]
    rho_pure_part: float
    tol: float

    @property
    def pure(self) -> bool:
        return self.e0.dim == 0


def nagy_foias_split(t: np.ndarray, tol: float = 1e-8) -> NagyFoiasSplit:
    """Split a contraction into its unitary part E0 and pure part E1.

    E0 is the span of eigenvectors with |lambda| >= 1 - tol; the split is
    certified post hoc (T commutes with P_E0, T|_E0 unitary, rho(T|_E1)
    < 1 - tol) and certification failure raises with the offending
    eigenvalue neighborhood.
    """
    a = np.asarray(t, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError("split requires a square matrix")
    if opnorm(a) > 1.0 + tol:
        raise NotContractiveError("split requires a contraction")
    dim = a.shape[0]
    w, v = np.linalg.eig(a)
    sel = np.abs(w) >= 1.0 - tol
    uni = tuple(complex(x) for x in w[sel])
    e0 = SubspaceFrame.from_columns(v[:, sel]) if np.any(sel) else SubspaceFrame.empty(dim)
    e1 = null_space_frame(e0.columns.conj().T) if e0.dim else SubspaceFrame(np.eye(dim, dtype=complex))
    p0 = e0.projection()
    comm = opnorm(a @ p0 - p0 @ a)
    if comm > tol:
        raise CertificationError(
            f"unitary part not reducing (commutator {comm:.3e}); "
            f"near-boundary eigenvalues {uni}"
        )
    if e0.dim:
        r0 = e0.columns.conj().T @ a @ e0.columns
        defect = opnorm(r0.conj().T @ r0 - np.eye(e0.dim))
        if defect > tol:
            raise CertificationError(
                f"restriction to unitary part not unitary (defect {defect:.3e})"
            )
    rho1 = 0.0
    if e1.dim:
        rho1 = spectral_radius(e1.columns.conj().T @ a @ e1.columns)
        if rho1 >= 1.0 - tol:
            raise CertificationError(
                f"pure part has spectral radius {rho1:.12f} >= 1 - {tol}"
            )
    return NagyFoiasSplit(e0, e1, uni, rho1, tol)


@dataclass
class InvariantRestrictionReport:
    """Geometric-decay check of ||P_S M_phi^*m P_S (1 (x) xi)||.

    Asserts only the consecutive-term RATIO |phi(0)| on the certified
    m-range; the measured constant (the m=0 value) is recorded, not
    asserted.
    """

    s_values: List[float]
    ratios: List[float]
    target_ratio: float
    certified_m_max: int
    max_ratio_error: float
    measured_constant: float
    passed: bool
    tol: float


def invariant_restriction_test(
    phi: MultiplierSymbol,
    theta: MultiplierSymbol,
    basis: TruncatedBasis,
    m_max: int,
    tol: float = 1e-8,
) -> InvariantRestrictionReport:
    """Decay of the compressed adjoint powers on S = theta . V, theta inner.

    Preconditions: scalar phi; theta inner at truncation (isometric exact
    columns) with theta(0) != 0; basis is a Hardy polydisc basis matching
    theta's coefficient dimension.
    """
    if phi.coeff_dim != 1:
        raise InvalidInputError("test requires a scalar symbol phi")
    if not isinstance(basis.domain, PolydiscDomain) or any(
        f.family != "hardy" for f in basis.domain.factors
    ):
        raise InvalidInputError("test requires a Hardy polydisc basis")
    if opnorm(theta.phi0) <= tol:
        raise InvalidInputError("theta(0) must be nonzero")
    pi = multiplier_matrix(basis, theta)
    cols, ncols = pi.data[:, : pi.exact_column_count()], pi.exact_column_count()
    if ncols == 0:
        raise InvalidInputError("degree cap too small for deg theta")
    iso_defect = opnorm(cols.conj().T @ cols - np.eye(ncols))
    if iso_defect > 1e-10:
        raise InvalidInputError(
            f"theta is not inner at truncation (isometry defect {iso_defect:.3e})"
        )
    frame = SubspaceFrame.from_columns(cols)
    q = frame.columns
    # xi: a direction not annihilated by theta(0)^* (top left singular vector)
    u, _, _ = np.linalg.svd(theta.phi0)
    xi = u[:, 0]
    one_xi = np.zeros(basis.dim, dtype=complex)
    one_xi[: basis.coeff_dim] = xi
    comp = adjoint_compression(lift_scalar_symbol(phi, basis.coeff_dim), basis)
    v = q @ (q.conj().T @ one_xi)
    s_values = [float(np.linalg.norm(q.conj().T @ v))]
    w = v
    for _ in range(m_max):
        w = comp.data @ w
        s_values.append(float(np.linalg.norm(q.conj().T @ w)))
    target = float(np.abs(phi(tuple([0.0] * phi.n))[0, 0]))
    deg_phi = max(phi.degree, 1)
    certified = max(0, (basis.degree_cap - 2 * theta.degree) // deg_phi)
    certified = min(certified, m_max)
    if certified < 1:
        raise InvalidInputError(
            "exactness budget too small for deg theta + m deg phi growth "
            f"(largest certified m = {certified})"
        )
    ratios: List[float] = []
    errors: List[float] = []
    floor = 1e-14 * max(s_values[0], 1.0)
    for m in range(len(s_values) - 1):
        if s_values[m] <= floor:
            break
        r = s_values[m + 1] / s_values[m]
        ratios.append(r)
        if m < certified:
            errors.append(abs(r - target))
    max_err = max(errors, default=0.0)
    return InvariantRestrictionReport(
        s_values=s_values,
        ratios=ratios,
        target_ratio=target,
        certified_m_max=certified,
        max_ratio_error=max_err,
        measured_constant=s_values[0],
        passed=bool(errors) and max_err <= tol,
        tol=tol,
    )


@dataclass
class SliceConsistencyReport:
    full_verdict: str
    slice_verdicts: List[str]
    consistent: bool


def slice_purity_consistency(
    phi: MultiplierSymbol,
    domain: PolydiscDomain,
    d_max: int,
    tol: float = 1e-8,
    axis: Optional[int] = None,
) -> SliceConsistencyReport:
    """Purity verdict must be invariant under slicing an axis to zero.

    ``axis=None`` checks every axis.  Slices of a symbol certified on the
    padded full-space truncation stay certified: the sliced multiplier
    matrix is a compression of the full one, so the padded-norm
    precondition cannot fail on a slice.
    """
    if any(f.family != "hardy" for f in domain.factors):
        raise InvalidInputError("slice consistency is stated on Hardy polydiscs")
    if domain.n < 2:
        raise InvalidInputError("slicing needs n >= 2")
    full = multiplier_purity_verdict(phi, domain, d_max, tol)
    axes = range(domain.n) if axis is None else [axis]
    slices: List[str] = []
    for i in axes:
        sub = PolydiscDomain(domain.factors[:i] + domain.factors[i + 1 :])
        rep = multiplier_purity_verdict(slice_symbol(phi, i), sub, d_max, tol)
        slices.append(rep.verdict)
    return SliceConsistencyReport(
        full_verdict=full.verdict,
        slice_verdicts=slices,
        consistent=all(s == full.verdict for s in slices),
    )


def random_contractive_symbol(
    rng: np.random.Generator,
    domain: Domain,
    coeff_dim: int,
    degree: int,
    d_max: int,
    unitary_constant: bool = False,
) -> MultiplierSymbol:
    """Seeded random polynomial symbol, certified on the padded truncation.

    Plain branch: iid complex Gaussian coefficient matrices rescaled by
    0.99 / padded-norm, so every compression at degrees <= d_max has norm
    <= 0.99.  ``unitary_constant=True`` populates the non-pure branch: a
    contractive multiplier with unitary constant term is constant in the
    unitary directions, so the symbol is blockdiag(unimodular constant,
    random contractive symbol on the remaining dims); for coeff_dim = 1 it
    is a unimodular constant.
    """
    n = domain.n
    if unitary_constant:
        u = complex(np.exp(2j * math.pi * rng.uniform()))
        if coeff_dim == 1:
            return MultiplierSymbol(n, 1, {(0,) * n: np.array([[u]])})
        inner = random_contractive_symbol(
            rng, domain, coeff_dim - 1, degree, d_max, unitary_constant=False
        )
        terms: Dict[Tuple[int, ...], np.ndarray] = {}
        for alpha, mat in inner.terms.items():
            big = np.zeros((coeff_dim, coeff_dim), dtype=complex)
            big[1:, 1:] = mat
            terms[alpha] = big
        zero = (0,) * n
        base = terms.get(zero, np.zeros((coeff_dim, coeff_dim), dtype=complex))
        base[0, 0] = u
        terms[zero] = base
        return MultiplierSymbol(n, coeff_dim, terms)
    terms = {}
    for alpha in enumerate_indices(n, degree):
        terms[alpha] = rng.standard_normal((coeff_dim, coeff_dim)) + 1j * rng.standard_normal(
            (coeff_dim, coeff_dim)
        )
    raw = MultiplierSymbol(n, coeff_dim, terms)
    padded = basis_for(domain, d_max + raw.degree, coeff_dim)
    norm = opnorm(multiplier_matrix(padded, raw))
    if norm == 0.0:
        raise InvalidInputError("degenerate zero random symbol")
    return raw.scaled(0.99 / norm)
