"""Graded truncated orthonormal bases for vector-valued spaces on D^n and B_n.

The basis of the degree-D truncation V_D is ``{e_alpha (x) xi_j}`` where
``e_alpha = z^alpha / ||z^alpha||`` runs over all multi-indices with
``|alpha| <= D`` in graded lexicographic order and ``xi_j`` runs over the
coefficient space E.  Coordinates are laid out with the coefficient index
fastest, so degree blocks are contiguous and every compression downstream
is a leading principal block.

Monomial norms: polydisc ``||z^alpha||^2 = prod_i 1/c^(i)_{alpha_i}``;
ball ``||z^alpha||^2 = alpha! / (|alpha|! a_{|alpha|})``.  Norms are stored
unsquared because shift weights are ratios of norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidInputError
from .kernels import BallKernelSpec, KernelSpec1D, ball_coeff, coeff_1d

__all__ = [
    "MultiIndex",
    "degree",
    "graded_lex_key",
    "enumerate_indices",
    "multi_factorial",
    "PolydiscDomain",
    "BallDomain",
    "TruncatedBasis",
    "polydisc_basis",
    "ball_basis",
    "monomial_norm",
    "SpaceVector",
    "kernel_vector",
    "MultiplierSymbol",
    "constant_symbol",
    "scalar_symbol",
    "lift_scalar_symbol",
    "symbol_product",
    "slice_symbol",
]

MultiIndex = Tuple[int, ...]


def degree(alpha: MultiIndex) -> int:
    """Total degree |alpha|."""
    return sum(alpha)


def graded_lex_key(alpha: MultiIndex) -> Tuple[int, MultiIndex]:
    """Sort key for the graded lexicographic order used everywhere."""
    return (sum(alpha), alpha)


def _indices_of_degree(n: int, d: int) -> Iterator[MultiIndex]:
    if n == 1:
        yield (d,)
        return
    for first in range(d + 1):
        for rest in _indices_of_degree(n - 1, d - first):
            yield (first,) + rest


def enumerate_indices(n: int, D: int) -> Tuple[MultiIndex, ...]:
    """All multi-indices with |alpha| <= D in graded lexicographic order."""
    if n < 1 or D < 0:
        raise InvalidInputError(f"need n >= 1 and D >= 0, got n={n}, D={D}")
    out = []
    for d in range(D + 1):
        out.extend(_indices_of_degree(n, d))
    return tuple(out)


def multi_factorial(alpha: MultiIndex) -> int:
    """alpha! = prod alpha_i!."""
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


@dataclass(frozen=True)
class PolydiscDomain:
    """A product domain D^n with one 1-D kernel per factor."""

    factors: Tuple[KernelSpec1D, ...]

    @property
    def n(self) -> int:
        return len(self.factors)

    kind = "polydisc"


@dataclass(frozen=True)
class BallDomain:
    """The ball B_n with a unitarily invariant kernel."""

    spec: BallKernelSpec

    @property
    def n(self) -> int:
        return self.spec.n

    kind = "ball"


Domain = Union[PolydiscDomain, BallDomain]


@dataclass(frozen=True)
class TruncatedBasis:
    """The graded orthonormal monomial basis of V_D, with per-monomial norms.

    ``index_table`` is graded-lex ordered; ``norms[k]`` is ``||z^alpha_k||``
    for ``alpha_k = index_table[k]``.  The coordinate of ``e_alpha (x) xi_j``
    lives at ``position(alpha) * coeff_dim + j``.
    """

    domain: Domain
    degree_cap: int
    coeff_dim: int
    index_table: Tuple[MultiIndex, ...]
    norms: Tuple[float, ...]

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def dim(self) -> int:
        return self.coeff_dim * len(self.index_table)

    @cached_property
    def _positions(self) -> Dict[MultiIndex, int]:
        return {alpha: k for k, alpha in enumerate(self.index_table)}

    @cached_property
    def _counts_by_degree(self) -> Tuple[int, ...]:
        counts = [0] * (self.degree_cap + 1)
        for alpha in self.index_table:
            counts[degree(alpha)] += 1
        return tuple(counts)

    def position(self, alpha: MultiIndex) -> int:
        try:
            return self._positions[tuple(alpha)]
        except KeyError:
            raise InvalidInputError(f"multi-index {alpha} outside the truncation")

    def coord_index(self, alpha: MultiIndex, j: int) -> int:
        if not 0 <= j < self.coeff_dim:
            raise InvalidInputError(f"coefficient index {j} outside dim E = {self.coeff_dim}")
        return self.position(alpha) * self.coeff_dim + j

    def norm_of(self, alpha: MultiIndex) -> float:
        return self.norms[self.position(alpha)]

    def dim_upto(self, d: int) -> int:
        """Number of coordinates carried by degrees <= d (0 if d < 0)."""
        if d < 0:
            return 0
        d = min(d, self.degree_cap)
        return self.coeff_dim * sum(self._counts_by_degree[: d + 1])

    def degree_of_coord(self, k: int) -> int:
        return degree(self.index_table[k // self.coeff_dim])


def polydisc_basis(
    factors: Sequence[KernelSpec1D], degree_cap: int, coeff_dim: int = 1
) -> TruncatedBasis:
    """Truncated basis of the E-valued product space on D^n."""
    factors = tuple(factors)
    if not factors:
        raise InvalidInputError("polydisc basis needs at least one factor")
    if coeff_dim < 1:
        raise InvalidInputError("coeff_dim must be >= 1")
    table = enumerate_indices(len(factors), degree_cap)
    norms = []
    for alpha in table:
        nsq = 1.0
        for spec, a in zip(factors, alpha):
            nsq /= coeff_1d(spec, a)
        norms.append(math.sqrt(nsq))
    return TruncatedBasis(
        domain=PolydiscDomain(factors),
        degree_cap=degree_cap,
        coeff_dim=coeff_dim,
        index_table=table,
        norms=tuple(norms),
    )


def ball_basis(spec: BallKernelSpec, degree_cap: int, coeff_dim: int = 1) -> TruncatedBasis:
    """Truncated basis of the E-valued unitarily invariant space on B_n.

    Constructively checks the regularity conditions used downstream: the
    degree-0 block is an isometric copy of E (a_0 = 1), every monomial norm
    is finite and positive, and consecutive-degree norm ratios are bounded
    (shifts act boundedly on the truncation).
    """
    if coeff_dim < 1:
        raise InvalidInputError("coeff_dim must be >= 1")
    table = enumerate_indices(spec.n, degree_cap)
    a = [ball_coeff(spec, j) for j in range(degree_cap + 1)]
    norms = []
    for alpha in table:
        d = degree(alpha)
        gamma = math.factorial(d) // multi_factorial(alpha)
        nsq = 1.0 / (gamma * a[d])
        if not (math.isfinite(nsq) and nsq > 0.0):
            raise InvalidInputError(f"degenerate monomial norm at {alpha}")
        norms.append(math.sqrt(nsq))
    return TruncatedBasis(
        domain=BallDomain(spec),
        degree_cap=degree_cap,
        coeff_dim=coeff_dim,
        index_table=table,
        norms=tuple(norms),
    )


def monomial_norm(basis: TruncatedBasis, alpha: MultiIndex) -> float:
    """||z^alpha|| in the basis's space; alpha must lie in the truncation."""
    return basis.norm_of(tuple(alpha))


@dataclass
class SpaceVector:
    """Coordinates of a vector of V_D in the normalized basis."""

    basis: TruncatedBasis
    coords: np.ndarray

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=complex).reshape(-1)
        if self.coords.shape[0] != self.basis.dim:
            raise InvalidInputError(
                f"coordinate length {self.coords.shape[0]} != basis dim {self.basis.dim}"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))


def _interior_check(basis: TruncatedBasis, lam: Sequence[complex]) -> Tuple[complex, ...]:
    lam = tuple(complex(x) for x in lam)
    if len(lam) != basis.n:
        raise InvalidInputError(f"point has {len(lam)} coordinates, domain has {basis.n}")
    if isinstance(basis.domain, PolydiscDomain):
        if max(abs(x) for x in lam) >= 1.0:
            raise InvalidInputError("point not strictly inside the polydisc")
    else:
        if math.fsum(abs(x) ** 2 for x in lam) >= 1.0:
            raise InvalidInputError("point not strictly inside the ball")
    return lam


def kernel_vector(
    basis: TruncatedBasis, lam: Sequence[complex], xi: Sequence[complex]
) -> SpaceVector:
    """Degree-D truncation of K(., lam) xi.

    Coordinate on ``e_alpha (x) xi_j`` is ``conj(lam)^alpha / ||z^alpha|| * xi_j``.
    """
    lam = _interior_check(basis, lam)
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    if xi.shape[0] != basis.coeff_dim:
        raise InvalidInputError(f"xi has dim {xi.shape[0]}, coefficient space {basis.coeff_dim}")
    coords = np.zeros(basis.dim, dtype=complex)
    lam_conj = np.conj(lam)
    for k, alpha in enumerate(basis.index_table):
        mono = 1.0 + 0.0j
        for x, a in zip(lam_conj, alpha):
            mono *= x**a
        coords[k * basis.coeff_dim : (k + 1) * basis.coeff_dim] = (mono / basis.norms[k]) * xi
    return SpaceVector(basis, coords)


class MultiplierSymbol:
    """An operator-valued polynomial ``Phi(z) = sum_alpha Phi_alpha z^alpha``.

    ``terms`` maps multi-indices (length ``n``) to square complex matrices of
    size ``coeff_dim``.
    """

    def __init__(self, n: int, coeff_dim: int, terms: Dict[MultiIndex, np.ndarray]):
        if n < 1:
            raise InvalidInputError("symbol needs n >= 1 variables")
        if coeff_dim < 1:
            raise InvalidInputError("symbol needs coeff_dim >= 1")
        self.n = int(n)
        self.coeff_dim = int(coeff_dim)
        canon: Dict[MultiIndex, np.ndarray] = {}
        for alpha, mat in terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.n or any(a < 0 for a in alpha):
                raise InvalidInputError(f"bad multi-index {alpha} for n={self.n}")
            mat = np.asarray(mat, dtype=complex)
            if mat.shape != (self.coeff_dim, self.coeff_dim):
                raise InvalidInputError(
                    f"coefficient at {alpha} has shape {mat.shape}, expected square dim {self.coeff_dim}"
                )
            if np.any(mat != 0):
                canon[alpha] = mat.copy()
        self.terms = canon

    @property
    def degree(self) -> int:
        return max((degree(a) for a in self.terms), default=0)

    @property
    def phi0(self) -> np.ndarray:
        zero = (0,) * self.n
        if zero in self.terms:
            return self.terms[zero].copy()
        return np.zeros((self.coeff_dim, self.coeff_dim), dtype=complex)

    def __call__(self, z: Sequence[complex]) -> np.ndarray:
        z = tuple(complex(x) for x in z)
        if len(z) != self.n:
            raise InvalidInputError(f"point has {len(z)} coordinates, symbol has {self.n}")
        out = np.zeros((self.coeff_dim, self.coeff_dim), dtype=complex)
        for alpha, mat in self.terms.items():
            mono = 1.0 + 0.0j
            for x, a in zip(z, alpha):
                mono *= x**a
            out += mono * mat
        return out

    def scaled(self, factor: complex) -> "MultiplierSymbol":
        return MultiplierSymbol(
            self.n, self.coeff_dim, {a: factor * m for a, m in self.terms.items()}
        )

    def __repr__(self) -> str:
        return f"MultiplierSymbol(n={self.n}, coeff_dim={self.coeff_dim}, degree={self.degree}, terms={len(self.terms)})"


def constant_symbol(mat: np.ndarray, n: int) -> MultiplierSymbol:
    """The constant symbol Phi = mat on n variables."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim == 0:
        mat = mat.reshape(1, 1)
    return MultiplierSymbol(n, mat.shape[0], {(0,) * n: mat})


def scalar_symbol(n: int, coeffs: Dict[MultiIndex, complex]) -> MultiplierSymbol:
    """A scalar polynomial as a 1x1 symbol."""
    return MultiplierSymbol(
        n, 1, {tuple(a): np.array([[complex(c)]]) for a, c in coeffs.items()}
    )


def lift_scalar_symbol(phi: MultiplierSymbol, coeff_dim: int) -> MultiplierSymbol:
    """phi * I_E for a scalar (1x1) symbol."""
    if phi.coeff_dim != 1:
        raise InvalidInputError("lift requires a scalar symbol")
    eye = np.eye(coeff_dim, dtype=complex)
    return MultiplierSymbol(
        phi.n, coeff_dim, {a: complex(m[0, 0]) * eye for a, m in phi.terms.items()}
    )


def symbol_product(a: MultiplierSymbol, b: MultiplierSymbol) -> MultiplierSymbol:
    """Pointwise matrix product (a b)(z) = a(z) b(z) as a polynomial symbol."""
    if a.n != b.n or a.coeff_dim != b.coeff_dim:
        raise InvalidInputError("symbol product requires matching variables and dims")
    terms: Dict[MultiIndex, np.ndarray] = {}
    for alpha, ma in a.terms.items():
        for beta, mb in b.terms.items():
            gamma = tuple(x + y for x, y in zip(alpha, beta))
            if gamma in terms:
                terms[gamma] = terms[gamma] + ma @ mb
            else:
                terms[gamma] = ma @ mb
    return MultiplierSymbol(a.n, a.coeff_dim, terms)


def slice_symbol(phi: MultiplierSymbol, axis: int) -> MultiplierSymbol:
    """The symbol with z_axis := 0, re-indexed on the remaining variables."""
    if not 0 <= axis < phi.n:
        raise InvalidInputError(f"axis {axis} out of range for n={phi.n}")
    if phi.n < 2:
        raise InvalidInputError("slicing needs at least two variables")
    terms: Dict[MultiIndex, np.ndarray] = {}
    for alpha, mat in phi.terms.items():
        if alpha[axis] != 0:
            continue
        beta = alpha[:axis] + alpha[axis + 1 :]
        terms[beta] = mat
    return MultiplierSymbol(phi.n - 1, phi.coeff_dim, terms)
