"""Transfer-function realizations, BCL isometry pairs, and dilation certificates.

The three constructions here share one finite-dimensional skeleton: a
unitary block matrix U = [[A, B], [C, D]] acting on E (+) H_1 (+) ... (+)
H_{n-1}, the symbol Phi(z) = A + B E(z) (I - D E(z))^{-1} C it generates,
and matrix models of the multiplication tuple it dilates to.  Everything is
certified post hoc at stated tolerances; nothing relies on the (infinite
dimensional) existence arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import CertificationError, InvalidInputError
from .kernels import hardy
from .operators import OperatorMatrix, multiplier_matrix, opnorm, shift_matrix, spectral_radius
from .purity import PurityReport, basis_for, multiplier_purity_verdict
from .spaces import (
    MultiIndex,
    MultiplierSymbol,
    PolydiscDomain,
    TruncatedBasis,
    enumerate_indices,
    symbol_product,
)

__all__ = [
    "Colligation",
    "transfer_eval",
    "transfer_jet",
    "BCLTriple",
    "bcl_pair",
    "BCLCertificate",
    "bcl_dilation_certify",
    "colligation_from_defects",
    "JetPurityReport",
    "schur_agler_purity",
    "dilation_embedding",
    "haar_unitary",
    "random_bcl_triple",
]

UNITARITY_TOL = 1e-10
PROJECTION_TOL = 1e-12
JET_CAP = 64


@dataclass
class Colligation:
    """Unitary colligation U = [[a, b], [c, d]] on E (+) H_1 (+) ... (+) H_k.

    ``a`` maps E to E, ``d`` maps the internal sum of the H_i to itself;
    the assembled block matrix must be unitary to 1e-10.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    h_dims: Tuple[int, ...]
    e_dim: int

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=complex)
        self.b = np.asarray(self.b, dtype=complex)
        self.c = np.asarray(self.c, dtype=complex)
        self.d = np.asarray(self.d, dtype=complex)
        self.h_dims = tuple(int(h) for h in self.h_dims)
        self.e_dim = int(self.e_dim)
        if self.e_dim < 1 or not self.h_dims or any(h < 1 for h in self.h_dims):
            raise InvalidInputError("colligation needs e_dim >= 1 and nonempty h_dims >= 1")
        h = sum(self.h_dims)
        e = self.e_dim
        shapes = (self.a.shape, self.b.shape, self.c.shape, self.d.shape)
        if shapes != ((e, e), (e, h), (h, e), (h, h)):
            raise InvalidInputError(f"block shapes {shapes} inconsistent with e={e}, h={h}")
        u = self.unitary
        defect = opnorm(u.conj().T @ u - np.eye(e + h))
        if defect > UNITARITY_TOL:
            raise InvalidInputError(f"colligation block matrix not unitary (defect {defect:.3e})")

    @property
    def n_vars(self) -> int:
        return len(self.h_dims)

    @property
    def unitary(self) -> np.ndarray:
        return np.block([[self.a, self.b], [self.c, self.d]])

    def diag_indicator(self, i: int) -> np.ndarray:
        """The block indicator J_i of H_i inside the internal space."""
        h = sum(self.h_dims)
        j = np.zeros((h, h), dtype=complex)
        start = sum(self.h_dims[:i])
        for k in range(start, start + self.h_dims[i]):
            j[k, k] = 1.0
        return j


def _diag_e(c: Colligation, z: Sequence[complex]) -> np.ndarray:
    h = sum(c.h_dims)
    e = np.zeros((h, h), dtype=complex)
    pos = 0
    for zi, hi in zip(z, c.h_dims):
        for k in range(pos, pos + hi):
            e[k, k] = zi
        pos += hi
    return e


def transfer_eval(c: Colligation, z: Sequence[complex]) -> np.ndarray:
    """Phi(z) = a + b E(z) (I - d E(z))^{-1} c at an interior point of D^k."""
    z = tuple(complex(x) for x in z)
    if len(z) != c.n_vars:
        raise InvalidInputError(f"point has {len(z)} coordinates, colligation has {c.n_vars}")
    if max(abs(x) for x in z) >= 1.0:
        raise InvalidInputError("transfer function is evaluated strictly inside the polydisc")
    ez = _diag_e(c, z)
    h = sum(c.h_dims)
    resolvent = np.linalg.solve(np.eye(h) - c.d @ ez, c.c)
    return c.a + c.b @ ez @ resolvent


def transfer_jet(c: Colligation, degree: int) -> MultiplierSymbol:
    """Degree-``degree`` Taylor jet of the transfer function as a symbol.

    Coefficients follow the convolution recurrence R_{e_i} = J_i,
    R_beta = sum_i J_i d R_{beta - e_i}; Phi_beta = b R_beta c, Phi_0 = a.
    """
    if degree < 0:
        raise InvalidInputError("jet degree must be >= 0")
    if degree > JET_CAP:
        raise InvalidInputError(f"jet degree {degree} beyond cap {JET_CAP}")
    n = c.n_vars
    js = [c.diag_indicator(i) for i in range(n)]
    terms: Dict[MultiIndex, np.ndarray] = {(0,) * n: c.a}
    r: Dict[MultiIndex, np.ndarray] = {}
    for beta in enumerate_indices(n, degree):
        k = sum(beta)
        if k == 0:
            continue
        if k == 1:
            i = beta.index(1)
            r[beta] = js[i]
        else:
            acc = np.zeros_like(c.d)
            for i in range(n):
                if beta[i] >= 1:
                    prev = beta[:i] + (beta[i] - 1,) + beta[i + 1 :]
                    acc += js[i] @ c.d @ r[prev]
            r[beta] = acc
        coeff = c.b @ r[beta] @ c.c
        if not np.all(np.isfinite(coeff)):
            raise InvalidInputError(f"jet coefficient overflow at {beta}")
        terms[beta] = coeff
    return MultiplierSymbol(n, c.e_dim, terms)


@dataclass
class BCLTriple:
    """The data (E, U, P) generating the degree-one inner pair on axis p."""

    e_dim: int
    u: np.ndarray
    p: np.ndarray
    axis: int = 0

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=complex)
        self.p = np.asarray(self.p, dtype=complex)
        e = int(self.e_dim)
        if self.u.shape != (e, e) or self.p.shape != (e, e):
            raise InvalidInputError("U and P must be square of size e_dim")
        if opnorm(self.u.conj().T @ self.u - np.eye(e)) > UNITARITY_TOL:
            raise InvalidInputError("U is not unitary to 1e-10")
        if (
            opnorm(self.p @ self.p - self.p) > PROJECTION_TOL
            or opnorm(self.p - self.p.conj().T) > PROJECTION_TOL
        ):
            raise InvalidInputError("P is not an orthogonal projection to 1e-12")
        if self.axis < 0:
            raise InvalidInputError("axis must be >= 0")

    @property
    def p_perp(self) -> np.ndarray:
        return np.eye(self.e_dim, dtype=complex) - self.p


def bcl_pair(t: BCLTriple, n_vars: Optional[int] = None) -> Tuple[MultiplierSymbol, MultiplierSymbol]:
    """The pair Phi_p(z) = (P + z_p P_perp) U*, Phi_q(z) = U (P_perp + z_p P).

    Both have degree <= 1 in z_p only, and Phi_p Phi_q = Phi_q Phi_p =
    z_p I as an exact polynomial-coefficient identity.
    """
    n = n_vars if n_vars is not None else t.axis + 1
    if n < t.axis + 1:
        raise InvalidInputError(f"n_vars {n} too small for axis {t.axis}")
    uh = t.u.conj().T
    zero = (0,) * n
    ep = tuple(1 if i == t.axis else 0 for i in range(n))
    phi_p = MultiplierSymbol(n, t.e_dim, {zero: t.p @ uh, ep: t.p_perp @ uh})
    phi_q = MultiplierSymbol(n, t.e_dim, {zero: t.u @ t.p_perp, ep: t.u @ t.p})
    return phi_p, phi_q


def _pair_product_error(t: BCLTriple, phi_p: MultiplierSymbol, phi_q: MultiplierSymbol) -> float:
    """Coefficient-wise error of Phi_p Phi_q = Phi_q Phi_p = z_p I."""
    n = phi_p.n
    ep = tuple(1 if i == t.axis else 0 for i in range(n))
    target = MultiplierSymbol(n, t.e_dim, {ep: np.eye(t.e_dim, dtype=complex)})
    worst = 0.0
    for prod in (symbol_product(phi_p, phi_q), symbol_product(phi_q, phi_p)):
        keys = set(prod.terms) | set(target.terms)
        zero = np.zeros((t.e_dim, t.e_dim), dtype=complex)
        for k in keys:
            diff = prod.terms.get(k, zero) - target.terms.get(k, zero)
            worst = max(worst, float(np.max(np.abs(diff))))
    return worst


@dataclass
class BCLCertificate:
    """Certificate for the commuting-isometry tuple generated by a BCL triple.

    The tuple is (M_{z_i} for i != axis, M_{Phi_p}, M_{Phi_q}) on the
    truncated Hardy space of D^{n-1} (x) E; residuals are measured on
    exactness blocks only.
    """

    product_coeff_error: float
    max_commutator: float
    max_isometry_defect: float
    rho_p: float
    rho_q: float
    verdict_p: str
    verdict_q: str
    consistent_p: bool
    consistent_q: bool
    tol: float
    purity_tol: float

    @property
    def passed(self) -> bool:
        return (
            self.product_coeff_error <= 1e-12
            and self.max_commutator <= self.tol
            and self.max_isometry_defect <= self.tol
            and self.consistent_p
            and self.consistent_q
        )


def bcl_dilation_certify(
    t: BCLTriple,
    n: int,
    degree_cap: int,
    tol: float = 1e-10,
    purity_tol: float = 1e-8,
) -> BCLCertificate:
    """Certify the n-tuple of commuting isometries generated by a BCL triple.

    Residual gates: pairwise commutators and column-isometry defects <= tol
    on exactness blocks; pure branch of M_{Phi_p} iff rho(P U*) < 1 -
    purity_tol, and of M_{Phi_q} iff rho(U P_perp) < 1 - purity_tol.
    """
    if n < 2:
        raise InvalidInputError("dilation tuple needs n >= 2")
    if not 0 <= t.axis <= n - 2:
        raise InvalidInputError(f"axis {t.axis} out of range for n - 1 = {n - 1} variables")
    phi_p, phi_q = bcl_pair(t, n - 1)
    product_err = _pair_product_error(t, phi_p, phi_q)
    domain = PolydiscDomain((hardy(),) * (n - 1))
    basis = basis_for(domain, degree_cap, t.e_dim)
    ops: List[OperatorMatrix] = [
        shift_matrix(basis, i) for i in range(n - 1) if i != t.axis
    ]
    ops.append(multiplier_matrix(basis, phi_p))
    ops.append(multiplier_matrix(basis, phi_q))
    max_comm = 0.0
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            a, b = ops[i], ops[j]
            budget = min(a.exactness_degree, b.exactness_degree) - max(a.lift, b.lift)
            ncols = basis.dim_upto(budget)
            if ncols == 0:
                continue
            comm = (a.data @ b.data - b.data @ a.data)[:, :ncols]
            max_comm = max(max_comm, opnorm(comm))
    max_iso = 0.0
    for op in ops:
        cols = op.data[:, : op.exact_column_count()]
        if cols.shape[1] == 0:
            continue
        max_iso = max(max_iso, opnorm(cols.conj().T @ cols - np.eye(cols.shape[1])))
    rho_p = spectral_radius(t.p @ t.u.conj().T)
    rho_q = spectral_radius(t.u @ t.p_perp)
    rep_p = multiplier_purity_verdict(phi_p, domain, degree_cap, purity_tol)
    rep_q = multiplier_purity_verdict(phi_q, domain, degree_cap, purity_tol)
    cut = 1.0 - purity_tol
    consistent_p = rep_p.verdict != "inconsistent" and (rep_p.verdict == "pure") == (rho_p < cut)
    consistent_q = rep_q.verdict != "inconsistent" and (rep_q.verdict == "pure") == (rho_q < cut)
    return BCLCertificate(
        product_coeff_error=product_err,
        max_commutator=max_comm,
        max_isometry_defect=max_iso,
        rho_p=rho_p,
        rho_q=rho_q,
        verdict_p=rep_p.verdict,
        verdict_q=rep_q.verdict,
        consistent_p=consistent_p,
        consistent_q=consistent_q,
        tol=tol,
        purity_tol=purity_tol,
    )


def _psd_sqrt(a: np.ndarray, tol: float) -> np.ndarray:
    """Square root of a Hermitian matrix that is PSD up to -tol."""
    sym = (a + a.conj().T) / 2
    w, v = np.linalg.eigh(sym)
    if w.min() < -tol:
        raise InvalidInputError(f"matrix not positive semidefinite (min eig {w.min():.3e})")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def _hereditary_product(x_hat: Sequence[np.ndarray], g: np.ndarray, skip: Optional[int]) -> np.ndarray:
    """prod_{j != skip} (I - C_{X_j}) applied to g, C_X(A) = X A X*."""
    out = np.asarray(g, dtype=complex)
    for j, xj in enumerate(x_hat):
        if j == skip:
            continue
        out = out - xj @ out @ xj.conj().T
    return out


def colligation_from_defects(
    x: Sequence[np.ndarray], g: Sequence[np.ndarray], tol: float = 1e-8
) -> Colligation:
    """Assemble the unitary colligation transported by a commuting tuple.

    Inputs: a commuting tuple (X_1, ..., X_n) on a finite H and positive
    matrices G_1, ..., G_{n-1} splitting the last defect, sum G_i =
    I - X_n X_n*.  The graph map

        (D h, F_1 X_1* h, ..., F_{n-1} X_{n-1}* h)
            |-> (D X_n* h, F_1 h, ..., F_{n-1} h)

    with D = (prod_j (I - C_{X_j})(I))^{1/2} and F_i = S_X(G_i)^{1/2} is
    isometric whenever the split holds, and is extended to a unitary by
    pairing SVD orthocomplement bases in order.
    """
    xs = [np.asarray(m, dtype=complex) for m in x]
    gs = [np.asarray(m, dtype=complex) for m in g]
    if len(xs) < 2:
        raise InvalidInputError("tuple needs n >= 2")
    if len(gs) != len(xs) - 1:
        raise InvalidInputError(f"need n - 1 = {len(xs) - 1} defect splitters, got {len(gs)}")
    dim = xs[0].shape[0]
    for m in xs + gs:
        if m.shape != (dim, dim):
            raise InvalidInputError("all matrices must be square of one size")
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            comm = opnorm(xs[i] @ xs[j] - xs[j] @ xs[i])
            if comm > tol:
                raise InvalidInputError(f"tuple does not commute (||[X_{i},X_{j}]|| = {comm:.3e})")
    x_hat, x_n = xs[:-1], xs[-1]
    eye = np.eye(dim, dtype=complex)
    split_gap = opnorm(eye - x_n @ x_n.conj().T - sum(gs))
    if split_gap > tol:
        raise InvalidInputError(
            f"defect split violated: ||I - X_n X_n* - sum G_i|| = {split_gap:.3e}"
        )
    dhat = _psd_sqrt(_hereditary_product(x_hat, eye, skip=None), tol)
    fs = [
        _psd_sqrt(_hereditary_product(x_hat, gs[i], skip=i), tol)
        for i in range(len(gs))
    ]
    ml = np.vstack([dhat] + [f @ xh.conj().T for f, xh in zip(fs, x_hat)])
    mr = np.vstack([dhat @ x_n.conj().T] + list(fs))
    gram_gap = opnorm(ml.conj().T @ ml - mr.conj().T @ mr)
    if gram_gap > tol:
        raise InvalidInputError(
            f"graph map not isometric (Gram gap {gram_gap:.3e}); defect conditions fail numerically"
        )
    # full SVD of the graph pair: leading singular directions carry the
    # range-to-range map, trailing ones are the two orthocomplement bases,
    # paired in order; W V^H is the error-minimizing unitary extension
    w_full, _, vh_full = np.linalg.svd(mr @ ml.conj().T)
    u = w_full @ vh_full
    graph_err = opnorm(u @ ml - mr)
    if graph_err > 20 * tol:
        raise CertificationError(
            f"no unitary extension at this truncation (graph error {graph_err:.3e})"
        )
    n_internal = len(x_hat)
    return Colligation(
        a=u[:dim, :dim],
        b=u[:dim, dim:],
        c=u[dim:, :dim],
        d=u[dim:, dim:],
        h_dims=(dim,) * n_internal,
        e_dim=dim,
    )


@dataclass
class JetPurityReport:
    """Purity verdict of the degree-D Taylor jet of a transfer function.

    The verdict is jet-certified to the stated degree: compression spectra
    at degrees <= D depend only on coefficients <= D, so they are exact for
    the rational symbol; the jet polynomial itself need not be a
    contractive multiplier, hence no padded-contractivity gate.
    """

    report: PurityReport
    jet_degree: int
    rho_a: float

    @property
    def consistent(self) -> bool:
        return self.report.verdict != "inconsistent"


def schur_agler_purity(c: Colligation, degree_cap: int, tol: float = 1e-8) -> JetPurityReport:
    """Purity verdict of the transfer function via its degree-D jet."""
    jet = transfer_jet(c, degree_cap)
    domain = PolydiscDomain((hardy(),) * c.n_vars)
    report = multiplier_purity_verdict(jet, domain, degree_cap, tol, check_contractive=False)
    return JetPurityReport(report=report, jet_degree=degree_cap, rho_a=spectral_radius(c.a))


def dilation_embedding(
    x_hat: Sequence[np.ndarray], dhat: np.ndarray, basis: TruncatedBasis
) -> np.ndarray:
    """The matrix of Pi h = sum_alpha e_alpha (x) D X^{*alpha} h on Hardy D^k.

    Intertwines Pi X_i* = M_{z_i}* Pi exactly on rows of degree <= D - 1;
    the degree-D rows carry the geometric tail of the untruncated relation.
    """
    if not isinstance(basis.domain, PolydiscDomain) or any(
        f.family != "hardy" for f in basis.domain.factors
    ):
        raise InvalidInputError("dilation embedding is a Hardy-space construction")
    if len(x_hat) != basis.n:
        raise InvalidInputError(f"tuple has {len(x_hat)} members, basis has n = {basis.n}")
    dim = dhat.shape[0]
    if basis.coeff_dim != dim:
        raise InvalidInputError("coefficient dimension must match the tuple's space")
    adj: Dict[MultiIndex, np.ndarray] = {(0,) * basis.n: np.eye(dim, dtype=complex)}
    for alpha in basis.index_table:
        if sum(alpha) == 0:
            continue
        i = next(k for k, ak in enumerate(alpha) if ak > 0)
        prev = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1 :]
        adj[alpha] = x_hat[i].conj().T @ adj[prev]
    pi = np.zeros((basis.dim, dim), dtype=complex)
    c = basis.coeff_dim
    for k, alpha in enumerate(basis.index_table):
        pi[k * c : (k + 1) * c, :] = dhat @ adj[alpha]
    return pi


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary (QR of a complex Gaussian with phase fix)."""
    gauss = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(gauss)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_bcl_triple(
    rng: np.random.Generator, e_dim: int, axis: int = 0, rank: Optional[int] = None
) -> BCLTriple:
    """Seeded random BCL triple: Haar U, coordinate projection conjugated by Haar."""
    u = haar_unitary(rng, e_dim)
    if rank is None:
        rank = int(rng.integers(0, e_dim + 1))
    if not 0 <= rank <= e_dim:
        raise InvalidInputError(f"projection rank {rank} out of range")
    v = haar_unitary(rng, e_dim)
    p0 = np.zeros((e_dim, e_dim), dtype=complex)
    for k in range(rank):
        p0[k, k] = 1.0
    p = v @ p0 @ v.conj().T
    p = (p + p.conj().T) / 2
    return BCLTriple(e_dim=e_dim, u=u, p=p, axis=axis)
