"""Transfer functions of unitary colligations, isometric-pair symbols,
colligation assembly from defect data, and the row-contraction embedding.

Hand cases are frozen from direct matrix algebra; the jet is validated
against pointwise transfer evaluation with a geometric tail bound.
"""

import numpy as np
import pytest

from gradedshift import (
    BCLTriple,
    Colligation,
    InvalidInputError,
    bcl_dilation_certify,
    bcl_pair,
    colligation_from_defects,
    dilation_embedding,
    hardy,
    polydisc_basis,
    schur_agler_purity,
    shift_matrix,
    symbol_product,
    transfer_eval,
    transfer_jet,
)
from gradedshift.dilation import haar_unitary, random_bcl_triple


def random_colligation(seed: int, e_dim: int, h_dims) -> Colligation:
    rng = np.random.default_rng(seed)
    h = sum(h_dims)
    u = haar_unitary(rng, e_dim + h)
    return Colligation(
        a=u[:e_dim, :e_dim],
        b=u[:e_dim, e_dim:],
        c=u[e_dim:, :e_dim],
        d=u[e_dim:, e_dim:],
        h_dims=tuple(h_dims),
        e_dim=e_dim,
    )


def eval_symbol(sym, z):
    acc = np.zeros((sym.coeff_dim, sym.coeff_dim), dtype=complex)
    for alpha, coeff in sym.terms.items():
        acc += coeff * np.prod([z[i] ** alpha[i] for i in range(len(z))])
    return acc


class TestTransferEval:
    def test_b_zero_is_constant(self):
        rng = np.random.default_rng(7)
        a = haar_unitary(rng, 2)
        d = haar_unitary(rng, 3)
        c = Colligation(
            a=a, b=np.zeros((2, 3)), c=np.zeros((3, 2)), d=d, h_dims=(2, 1), e_dim=2
        )
        for z in ((0.1, -0.2), (0.5j, 0.3), (0.0, 0.0)):
            assert np.allclose(transfer_eval(c, z), a, atol=1e-14)

    def test_d_zero_is_linear_pencil(self):
        # [[0, I], [I, 0]] is unitary with d = 0, so Phi(z) = E(z) exactly
        c = Colligation(
            a=np.zeros((2, 2)),
            b=np.eye(2),
            c=np.eye(2),
            d=np.zeros((2, 2)),
            h_dims=(1, 1),
            e_dim=2,
        )
        for z in ((0.3, -0.4), (0.1j, 0.7)):
            assert np.allclose(transfer_eval(c, z), np.diag(z), atol=1e-14)
        jet = transfer_jet(c, 2)
        assert np.allclose(jet.terms[(1, 0)], np.diag([1.0, 0.0]), atol=1e-14)
        assert np.allclose(jet.terms[(0, 1)], np.diag([0.0, 1.0]), atol=1e-14)

    def test_boundary_point_rejected(self):
        c = random_colligation(5, 1, (2,))
        with pytest.raises(InvalidInputError):
            transfer_eval(c, (1.0, 0.0))
        with pytest.raises(InvalidInputError):
            transfer_eval(c, (0.2, 1.2))

    def test_wrong_arity_rejected(self):
        c = random_colligation(5, 1, (2,))
        with pytest.raises(InvalidInputError):
            transfer_eval(c, (0.2, 0.2, 0.2))

    def test_schur_class_contractivity(self):
        rng = np.random.default_rng(11)
        c = random_colligation(13, 2, (2, 3))
        for _ in range(200):
            z = 0.95 * (rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)) / np.sqrt(2)
            val = transfer_eval(c, z)
            assert np.linalg.norm(val, 2) <= 1.0 + 1e-10


class TestTransferJet:
    @pytest.mark.parametrize("seed,e_dim,h_dims", [(1, 1, (2,)), (2, 2, (2, 2)), (3, 2, (1, 1, 1))])
    def test_jet_matches_pointwise_eval(self, seed, e_dim, h_dims):
        c = random_colligation(seed, e_dim, h_dims)
        degree = 12
        jet = transfer_jet(c, degree)
        rng = np.random.default_rng(seed + 100)
        n = len(h_dims)
        for _ in range(5):
            z = (0.2 / n) * np.exp(2j * np.pi * rng.uniform(size=n))
            direct = transfer_eval(c, z)
            approx = eval_symbol(jet, z)
            # Schur-class tail: sum_{k > degree} (sum_i |z_i|)^k <= 0.2^13 / 0.8
            assert np.linalg.norm(direct - approx, 2) <= 1e-8

    def test_jet_degree_guard(self):
        c = random_colligation(4, 1, (2,))
        with pytest.raises(InvalidInputError):
            transfer_jet(c, -1)
        with pytest.raises(InvalidInputError):
            transfer_jet(c, 65)

    def test_non_unitary_colligation_rejected(self):
        with pytest.raises(InvalidInputError, match="unitary"):
            Colligation(
                a=np.array([[0.5]]),
                b=np.zeros((1, 2)),
                c=np.zeros((2, 1)),
                d=np.eye(2),
                h_dims=(2,),
                e_dim=1,
            )


class TestBCLPair:
    def test_identity_u_rank_one_p(self):
        t = BCLTriple(e_dim=2, u=np.eye(2), p=np.diag([1.0, 0.0]))
        pp, qq = bcl_pair(t, 1)
        assert np.allclose(pp.terms[(0,)], np.diag([1.0, 0.0]))
        assert np.allclose(pp.terms[(1,)], np.diag([0.0, 1.0]))
        assert np.allclose(qq.terms[(0,)], np.diag([0.0, 1.0]))
        assert np.allclose(qq.terms[(1,)], np.diag([1.0, 0.0]))

    def test_full_projection(self):
        rng = np.random.default_rng(21)
        u = haar_unitary(rng, 3)
        t = BCLTriple(e_dim=3, u=u, p=np.eye(3))
        pp, qq = bcl_pair(t, 1)
        assert np.allclose(pp.terms[(0,)], u.conj().T, atol=1e-14)
        assert (1,) not in pp.terms or np.allclose(pp.terms[(1,)], 0)
        assert np.allclose(qq.terms[(1,)], u, atol=1e-14)

    def test_zero_projection(self):
        rng = np.random.default_rng(22)
        u = haar_unitary(rng, 3)
        t = BCLTriple(e_dim=3, u=u, p=np.zeros((3, 3)))
        pp, qq = bcl_pair(t, 1)
        assert np.allclose(pp.terms[(1,)], u.conj().T, atol=1e-14)
        assert np.allclose(qq.terms[(0,)], u, atol=1e-14)

    @pytest.mark.parametrize("seed", range(6))
    def test_product_is_axis_coordinate(self, seed):
        rng = np.random.default_rng(seed)
        t = random_bcl_triple(rng, e_dim=3)
        pp, qq = bcl_pair(t, 2)
        prod = symbol_product(pp, qq)
        for alpha, coeff in prod.terms.items():
            if alpha == (1, 0):
                assert np.allclose(coeff, np.eye(3), atol=1e-12)
            else:
                assert np.linalg.norm(coeff) <= 1e-12
        prod_rev = symbol_product(qq, pp)
        assert np.allclose(prod_rev.terms[(1, 0)], np.eye(3), atol=1e-12)

    def test_invalid_projection_rejected(self):
        with pytest.raises(InvalidInputError):
            BCLTriple(e_dim=2, u=np.eye(2), p=np.array([[0.5, 0.0], [0.0, 0.0]]))

    def test_non_unitary_u_rejected(self):
        with pytest.raises(InvalidInputError):
            BCLTriple(e_dim=2, u=2 * np.eye(2), p=np.eye(2))


class TestBCLCertify:
    def test_identity_hand_case(self):
        t = BCLTriple(e_dim=2, u=np.eye(2), p=np.diag([1.0, 0.0]))
        cert = bcl_dilation_certify(t, 2, 6)
        assert cert.rho_p == pytest.approx(1.0, abs=1e-12)
        assert cert.rho_q == pytest.approx(1.0, abs=1e-12)
        assert cert.verdict_p == "not_pure"
        assert cert.verdict_q == "not_pure"
        assert cert.passed
        assert cert.product_coeff_error <= 1e-14

    def test_zero_projection_purity(self):
        rng = np.random.default_rng(30)
        u = haar_unitary(rng, 2)
        t = BCLTriple(e_dim=2, u=u, p=np.zeros((2, 2)))
        cert = bcl_dilation_certify(t, 2, 6)
        # P = 0 makes Phi_p = z U*, a pure isometry; Phi_q = U stays unitary.
        assert cert.rho_p <= 1e-12
        assert cert.verdict_p == "pure"
        assert cert.verdict_q == "not_pure"
        assert cert.passed

    @pytest.mark.parametrize("seed", range(8))
    def test_random_sweep_consistent(self, seed):
        rng = np.random.default_rng(1000 + seed)
        t = random_bcl_triple(rng, e_dim=4)
        cert = bcl_dilation_certify(t, 2, 5)
        assert cert.passed
        assert cert.max_commutator <= 1e-10
        assert cert.max_isometry_defect <= 1e-10
        assert cert.product_coeff_error <= 1e-12

    def test_three_variable_axis(self):
        rng = np.random.default_rng(44)
        t = random_bcl_triple(rng, e_dim=3, axis=1)
        cert = bcl_dilation_certify(t, 3, 4)
        assert cert.passed


class TestColligationFromDefects:
    def test_zero_tuple(self):
        z = np.zeros((1, 1))
        c = colligation_from_defects([z, z], [np.eye(1)])
        u = c.unitary
        assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-14)
        # graph map sends the defect direction e_1 to e_2
        assert np.allclose(u @ np.array([1.0, 0.0]), np.array([0.0, 1.0]), atol=1e-12)
        jet = transfer_jet(c, 3)
        lin = jet.terms.get((1,), np.zeros((1, 1)))
        assert abs(abs(lin[0, 0]) - 1.0) <= 1e-12
        for alpha, coeff in jet.terms.items():
            if alpha != (1,):
                assert np.linalg.norm(coeff) <= 1e-12

    def test_scalar_pair(self):
        x1 = np.array([[0.5]])
        x2 = np.array([[0.3]])
        g = [np.eye(1) - x2 @ x2.conj().T]
        c = colligation_from_defects([x1, x2], g)
        rng = np.random.default_rng(9)
        for _ in range(20):
            z = 0.9 * rng.uniform(-1, 1)
            val = transfer_eval(c, (z,))
            assert np.linalg.norm(val, 2) <= 1.0 + 1e-10

    def test_diagonal_three_tuple(self):
        rng = np.random.default_rng(17)
        xs = [np.diag(0.4 * rng.uniform(-1, 1, 3)).astype(complex) for _ in range(3)]
        defect = np.eye(3) - xs[-1] @ xs[-1].conj().T
        g = [0.4 * defect, 0.6 * defect]
        c = colligation_from_defects(xs, g)
        assert c.n_vars == 2
        rep = schur_agler_purity(c, 4)
        assert rep.report.verdict != "inconsistent"

    def test_broken_split_rejected(self):
        x1 = np.array([[0.5]])
        x2 = np.array([[0.3]])
        with pytest.raises(InvalidInputError, match="split"):
            colligation_from_defects([x1, x2], [0.5 * (np.eye(1) - x2 @ x2.conj().T)])

    def test_noncommuting_rejected(self):
        a = np.array([[0.0, 0.3], [0.0, 0.0]])
        b = np.array([[0.0, 0.0], [0.3, 0.0]])
        defect = np.eye(2) - b @ b.conj().T
        with pytest.raises(InvalidInputError, match="commute"):
            colligation_from_defects([a, b], [defect])


class TestSchurAglerPurity:
    def test_constant_unitary_not_pure(self):
        rng = np.random.default_rng(2)
        a = haar_unitary(rng, 2)
        d = haar_unitary(rng, 2)
        c = Colligation(
            a=a, b=np.zeros((2, 2)), c=np.zeros((2, 2)), d=d, h_dims=(1, 1), e_dim=2
        )
        rep = schur_agler_purity(c, 5)
        assert rep.report.verdict == "not_pure"
        assert rep.rho_a == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_sweep_never_inconsistent(self, seed):
        c = random_colligation(600 + seed, 2, (2, 2))
        rep = schur_agler_purity(c, 5)
        assert rep.report.verdict in ("pure", "not_pure")
        assert rep.jet_degree == 5


class TestDilationEmbedding:
    @staticmethod
    def _doubly_commuting_tuple(scale=0.28):
        # diagonal tuples double-commute and have product defects
        x1 = np.diag([scale, -0.5 * scale]).astype(complex)
        x2 = np.diag([0.5 * scale, scale]).astype(complex)
        eye = np.eye(2)
        prod = (eye - x1 @ x1.conj().T) @ (eye - x2 @ x2.conj().T)
        w, v = np.linalg.eigh(prod)
        dhat = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
        return [x1, x2], dhat

    def test_intertwining_exact_below_cap(self):
        xs, dhat = self._doubly_commuting_tuple()
        basis = polydisc_basis((hardy(), hardy()), 8, coeff_dim=2)
        pi = dilation_embedding(xs, dhat, basis)
        cut = basis.dim_upto(basis.degree_cap - 1)
        for i in range(2):
            mzi = shift_matrix(basis, i)
            gap = mzi.data.conj().T @ pi - pi @ xs[i].conj().T
            assert np.linalg.norm(gap[:cut, :]) <= 1e-12
            # the degree-8 rows carry the geometric tail, O(0.28^7)
            assert np.linalg.norm(gap) <= 1e-3

    def test_intertwining_tail_vanishes_deep(self):
        xs, dhat = self._doubly_commuting_tuple()
        basis = polydisc_basis((hardy(), hardy()), 25, coeff_dim=2)
        pi = dilation_embedding(xs, dhat, basis)
        for i in range(2):
            mzi = shift_matrix(basis, i)
            gap = mzi.data.conj().T @ pi - pi @ xs[i].conj().T
            assert np.linalg.norm(gap) <= 1e-8

    def test_isometry_for_doubly_commuting(self):
        xs, dhat = self._doubly_commuting_tuple()
        basis = polydisc_basis((hardy(), hardy()), 25, coeff_dim=2)
        pi = dilation_embedding(xs, dhat, basis)
        gram = pi.conj().T @ pi
        assert np.linalg.norm(gram - np.eye(2), 2) <= 1e-10

    def test_non_hardy_basis_rejected(self):
        from gradedshift import bergman

        xs, dhat = self._doubly_commuting_tuple()
        basis = polydisc_basis((bergman(), bergman()), 6, coeff_dim=2)
        with pytest.raises(InvalidInputError, match="Hardy"):
            dilation_embedding(xs, dhat, basis)

    def test_dimension_mismatch_rejected(self):
        xs, dhat = self._doubly_commuting_tuple()
        basis = polydisc_basis((hardy(), hardy()), 6, coeff_dim=1)
        with pytest.raises(InvalidInputError):
            dilation_embedding(xs, dhat, basis)


class TestRandomGenerators:
    def test_haar_unitary_is_unitary_and_deterministic(self):
        u1 = haar_unitary(np.random.default_rng(5), 6)
        u2 = haar_unitary(np.random.default_rng(5), 6)
        np.testing.assert_array_equal(u1, u2)
        assert np.linalg.norm(u1.conj().T @ u1 - np.eye(6), 2) <= 1e-12

    def test_random_bcl_triple_valid(self):
        rng = np.random.default_rng(8)
        t = random_bcl_triple(rng, e_dim=5, rank=2)
        assert np.linalg.norm(t.u.conj().T @ t.u - np.eye(5), 2) <= 1e-12
        assert np.linalg.norm(t.p @ t.p - t.p, 2) <= 1e-12
        assert np.linalg.norm(t.p - t.p.conj().T, 2) <= 1e-12
        assert int(round(np.trace(t.p).real)) == 2
