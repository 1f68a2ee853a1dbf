import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import null_space

from conftest import BELL, SX, SZ, UP, Z_DOWN, Z_UP
from twinlab import (
    BiorthogonalDecomposition,
    BiorthogonalityError,
    BipartiteDensity,
    DegenerateSplitError,
    ObservableStrength,
    Strength,
    TwinRejection,
    ValidationError,
    WeakSplit,
    biorthogonal_from_mixture,
    classify_observable,
    classify_projector,
    decompose_by_projector,
    detectable_part,
    hs_orthogonality_equiv,
    is_twin,
    principal_angles,
    pure_nonhermitian_expansion,
    schmidt_state,
    strong_mixture,
    twin_check,
    twin_solve,
    twin_spectral_projectors,
    verify_reduced_commutation,
    weak_split_expansion,
)
from twinlab.sampling import random_density, random_psd, random_pure, random_unitary


def random_hermitian(d, rng):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return g + g.conj().T


def realify(a1, a2):
    return np.concatenate([a1.real.ravel(), a1.imag.ravel(), a2.real.ravel(), a2.imag.ravel()])


def brute_twin_space(rho, rng):
    """Oracle: null space of the twin equation over a random Hermitian basis, via np.kron."""
    d1, d2 = rho.d1, rho.d2
    h1 = [random_hermitian(d1, rng) for _ in range(d1 * d1)]
    h2 = [random_hermitian(d2, rng) for _ in range(d2 * d2)]
    cols = [(np.kron(h, np.eye(d2)) @ rho.matrix).ravel() for h in h1]
    cols += [-(np.kron(np.eye(d1), h) @ rho.matrix).ravel() for h in h2]
    m = np.array(cols).T
    null = null_space(np.concatenate([m.real, m.imag]), rcond=1e-9)
    vecs = []
    for x in null.T:
        a1 = sum(c * h for c, h in zip(x[: d1 * d1], h1))
        a2 = sum(c * h for c, h in zip(x[d1 * d1 :], h2))
        vecs.append(realify(a1, a2))
    return np.array(vecs).T.reshape(2 * (d1 * d1 + d2 * d2), -1)


def solved_space(space):
    return np.array([realify(p.A1.matrix, p.A2.matrix) for p in space.pairs]).T.reshape(
        2 * (space.d1**2 + space.d2**2), -1
    )


def pure_density(v, d1, d2):
    v = np.asarray(v, complex)
    v = v / np.linalg.norm(v)
    return BipartiteDensity(d1, d2, np.outer(v, v.conj()))


def partially_strong_state():
    """|22><22| mixed with an entangled vector on span{|00>, |11>} (3x3)."""
    e = np.eye(3)
    psi = np.sqrt(0.7) * np.kron(e[0], e[0]) + np.sqrt(0.3) * np.kron(e[1], e[1])
    m = 0.4 * np.outer(np.kron(e[2], e[2]), np.kron(e[2], e[2])) + 0.6 * np.outer(psi, psi)
    return BipartiteDensity(3, 3, m)


def three_block_state(rng):
    """Three product terms with mutually orthogonal supports on both sides (3x3)."""
    e = np.eye(3, dtype=complex)
    perm = [2, 0, 1]
    w = np.array([0.5, 0.3, 0.2])
    m = sum(wk * np.kron(np.outer(e[k], e[k]), np.outer(e[perm[k]], e[perm[k]])) for k, wk in enumerate(w))
    u1, u2 = random_unitary(3, rng), random_unitary(3, rng)
    u = np.kron(u1, u2)
    a1 = u1 @ np.diag([1.0, 2.0, 3.0]) @ u1.conj().T
    a2 = u2 @ np.diag([2.0, 3.0, 1.0]) @ u2.conj().T
    return BipartiteDensity(3, 3, u @ m @ u.conj().T), a1, a2, w


class TestTwinCheck:
    def test_measured_singlet_sz(self, measured_singlet):
        # oracle: on |01>, sz(x)I gives +1 and I(x)(-sz) gives +1; on |10>, both give -1
        rho = measured_singlet.matrix
        lhs = np.kron(SZ, np.eye(2)) @ rho
        rhs = np.kron(np.eye(2), -SZ) @ rho
        assert_allclose(lhs, rhs)
        pair = twin_check(SZ, -SZ, measured_singlet)
        assert pair.residual == 0.0
        assert pair.A1.subsystem == 1 and pair.A2.subsystem == 2

    def test_identity(self, rng):
        rho = random_density(2, 3, rng=rng)
        assert twin_check(np.eye(2), np.eye(3), rho).residual < 1e-15

    def test_sx_rejected(self, measured_singlet):
        rho = measured_singlet.matrix
        diff = np.kron(SX, np.eye(2)) @ rho - np.kron(np.eye(2), SX) @ rho
        assert np.linalg.norm(diff, 2) > 0.1
        with pytest.raises(TwinRejection) as err:
            twin_check(SX, SX, measured_singlet)
        assert err.value.residual == pytest.approx(np.linalg.norm(diff, 2))
        assert not is_twin(SX, SX, measured_singlet)

    def test_nonhermitian(self, measured_singlet):
        with pytest.raises(ValidationError):
            twin_check(np.array([[0, 1], [0, 0]]), SZ, measured_singlet)


class TestReducedCommutation:
    def test_measured_singlet(self, measured_singlet):
        rep = verify_reduced_commutation(twin_check(SZ, -SZ, measured_singlet), measured_singlet)
        assert rep.norm1 == pytest.approx(0) and rep.norm2 == pytest.approx(0)

    def test_identity(self, rng):
        rho = random_density(3, 2, rng=rng)
        rep = verify_reduced_commutation((np.eye(3), np.eye(2)), rho)
        assert rep.norm1 == 0 and rep.norm2 == 0

    def test_solved_twins_of_random_states(self, rng):
        for _ in range(100):
            d1, d2 = rng.integers(1, 4, size=2)
            rank = int(rng.integers(1, d1 * d2 + 1))
            rho = random_density(int(d1), int(d2), rank, rng)
            for p in twin_solve(rho).pairs:
                rep = verify_reduced_commutation(p, rho)
                assert max(rep.norm1, rep.norm2) <= 1e-9


class TestTwinSolve:
    def test_product_state_trivial_only(self, rng):
        rho = BipartiteDensity(2, 3, np.kron(random_psd(2, rng=rng), random_psd(3, rng=rng)))
        space = twin_solve(rho)
        assert not space.has_nontrivial
        assert space.dimension == 1

    def test_measured_singlet(self, measured_singlet):
        space = twin_solve(measured_singlet)
        assert space.trivial == (True, False)
        pair = space.nontrivial_pairs[0]
        assert_allclose(pair.A1.matrix, SZ / 2, atol=1e-12)
        assert_allclose(pair.A2.matrix, -SZ / 2, atol=1e-12)
        data = twin_spectral_projectors(pair, measured_singlet)
        found = [
            tp for tp in data.projector_pairs
            if np.allclose(tp.P1.matrix, Z_UP, atol=1e-9) and np.allclose(tp.P2.matrix, Z_DOWN, atol=1e-9)
        ]
        assert len(found) == 1

    def test_bell(self, bell_density):
        space = twin_solve(bell_density)
        assert space.has_nontrivial
        # (|0><0|, |0><0|) is a twin of the Bell state
        lhs = np.kron(Z_UP, np.eye(2)) @ BELL
        rhs = np.kron(np.eye(2), Z_UP) @ BELL
        assert_allclose(lhs, rhs)
        basis = solved_space(space)
        x = realify(Z_UP, Z_UP)
        proj = basis @ np.linalg.lstsq(basis, x, rcond=None)[0]
        assert np.linalg.norm(proj - x) < 1e-10

    def test_basis_orthonormal(self, rng):
        space = twin_solve(random_density(3, 2, 2, rng))
        assert_allclose(space.basis.T @ space.basis, np.eye(space.dimension), atol=1e-12)

    def test_flags_match_detectable_parts(self, rng):
        for rho in [random_density(3, 3, 2, rng), random_density(2, 3, 1, rng)]:
            space = twin_solve(rho)
            for p, flag in zip(space.pairs, space.trivial):
                scalar = []
                for a, i in ((p.A1.matrix, 1), (p.A2.matrix, 2)):
                    c = detectable_part(a, rho.reduced(i))
                    scalar.append(np.allclose(c, np.trace(c) / len(c) * np.eye(len(c)), atol=1e-9))
                assert flag == all(scalar)

    @pytest.mark.parametrize("d1,d2", [(1, 2), (2, 2), (2, 3), (3, 2), (3, 3)])
    def test_matches_brute_force_oracle(self, rng, d1, d2):
        for rank in sorted({1, 2, d1 * d2}):
            rho = random_density(d1, d2, rank, rng)
            space = twin_solve(rho)
            oracle = brute_twin_space(rho, rng)
            assert oracle.shape[1] == space.dimension
            assert np.max(principal_angles(solved_space(space), oracle)) <= 1e-6
            for p in space.pairs:
                twin_check(p.A1, p.A2, rho)


class TestDetectablePart:
    def test_full_range(self):
        assert_allclose(np.abs(detectable_part(SZ, np.eye(2) / 2)), np.eye(2))
        assert_allclose(np.linalg.eigvalsh(detectable_part(SZ, np.eye(2) / 2)), [-1, 1])

    def test_rank_one(self):
        assert_allclose(detectable_part(SZ, Z_UP), [[1.0]])

    def test_diagonal(self):
        out = detectable_part(np.diag([3.0, 5, 7]), np.diag([0.5, 0.5, 0]))
        assert_allclose(np.sort(np.linalg.eigvalsh(out)), [3, 5])
        assert out.shape == (2, 2)

    def test_non_commuting(self):
        with pytest.raises(ValidationError, match="commute"):
            detectable_part(SX, np.diag([0.8, 0.2]))


class TestSpectralProjectors:
    def test_measured_singlet(self, measured_singlet):
        data = twin_spectral_projectors((SZ, -SZ), measured_singlet)
        assert_allclose(data.eigenvalues, [1, -1])
        (p, q) = data.projector_pairs
        assert_allclose(p.P1.matrix, Z_UP, atol=1e-12)
        assert_allclose(p.P2.matrix, Z_DOWN, atol=1e-12)
        assert_allclose(q.P1.matrix, Z_DOWN, atol=1e-12)
        assert_allclose(q.P2.matrix, Z_UP, atol=1e-12)
        assert all(tp.is_strong for tp in data.projector_pairs)

    def test_trivial(self, rng):
        rho = random_density(3, 3, 2, rng)
        data = twin_spectral_projectors((np.eye(3), np.eye(3)), rho)
        assert_allclose(data.eigenvalues, [1])
        tp = data.projector_pairs[0]
        # full-space projectors: the identity, whose range part is Q1
        assert_allclose(tp.P1.matrix, np.eye(3), atol=1e-12)
        assert data.multiplicities[0] == (3, 3)

    def test_bell_diag(self, bell_density):
        a = np.diag([1.0, 2.0])
        assert_allclose(np.kron(a, np.eye(2)) @ BELL, np.kron(np.eye(2), a) @ BELL)
        data = twin_spectral_projectors((a, a), bell_density)
        assert_allclose(data.eigenvalues, [2, 1])
        assert [tp.P1.rank for tp in data.projector_pairs] == [1, 1]
        assert_allclose(data.projector_pairs[1].P1.matrix, Z_UP, atol=1e-12)

    def test_different_multiplicities(self):
        # rho1 has rank 2 and rho2 rank 3 after mixing a degenerate block
        e = np.eye(3)
        m = 0.5 * np.kron(np.outer(e[0], e[0]), np.diag([0.5, 0.5, 0])) + 0.5 * np.kron(
            np.outer(e[1], e[1]), np.outer(e[2], e[2])
        )
        rho = BipartiteDensity(3, 3, m)
        data = twin_spectral_projectors((np.diag([1.0, -1, 0]), np.diag([1.0, 1, -1])), rho)
        assert data.multiplicities == ((1, 2), (1, 1))


class TestClassifyProjector:
    def test_measured_singlet_strong(self, measured_singlet):
        tp = classify_projector(Z_UP, measured_singlet)
        assert tp.strength is Strength.STRONG
        assert_allclose(tp.P2.matrix, Z_DOWN, atol=1e-12)

    def test_bell_weak(self, bell_density):
        # [P1, rho] = (|00><Phi+| - |Phi+><00|) / sqrt(2)
        c = np.outer(np.kron(UP, UP), BELL) / np.sqrt(2)
        oracle = np.linalg.norm(c - c.conj().T, 2)
        tp = classify_projector(Z_UP, bell_density)
        assert tp.strength is Strength.WEAK
        assert tp.commutator_norm == pytest.approx(oracle)
        assert_allclose(tp.P2.matrix, Z_UP, atol=1e-12)

    def test_identity_strong(self, bell_density):
        assert classify_projector(np.eye(2), bell_density).is_strong

    def test_not_a_twin(self):
        rho = BipartiteDensity(2, 2, np.kron(np.eye(2) / 2, np.eye(2) / 2))
        with pytest.raises(TwinRejection):
            classify_projector(Z_UP, rho)

    def test_partner_supplied(self, measured_singlet):
        assert classify_projector(Z_UP, measured_singlet, partner=Z_DOWN).is_strong
        with pytest.raises(TwinRejection):
            classify_projector(Z_UP, measured_singlet, partner=Z_UP)

    def test_partner_is_range_restricted(self):
        # rho2 has rank 2 inside a qutrit; the partner has no undetectable block
        v = (np.kron([1, 0], [1, 0, 0]) + np.kron([0, 1], [0, 1, 0])) / np.sqrt(2)
        rho = pure_density(v, 2, 3)
        tp = classify_projector(Z_UP, rho)
        assert_allclose(tp.P2.matrix, np.diag([1, 0, 0]), atol=1e-12)
        assert tp.detectable_ranks == (1, 1)


class TestClassifyObservable:
    def test_strong(self, measured_singlet):
        assert classify_observable((SZ, -SZ), measured_singlet) is ObservableStrength.STRONG

    def test_weak(self, bell_density):
        a = np.diag([1.0, 2.0])
        data = twin_spectral_projectors((a, a), bell_density)
        assert not any(tp.is_strong for tp in data.projector_pairs)
        assert classify_observable((a, a), bell_density) is ObservableStrength.WEAK

    def test_partially_strong(self):
        rho = partially_strong_state()
        a = np.diag([1.0, 2.0, 3.0])
        data = twin_spectral_projectors((a, a), rho)
        assert [tp.is_strong for tp in data.projector_pairs] == [True, False, False]
        assert classify_observable((a, a), rho) is ObservableStrength.PARTIALLY_STRONG

    def test_trivial_is_strong(self, bell_density):
        assert classify_observable((np.eye(2), np.eye(2)), bell_density) is ObservableStrength.STRONG


class TestDecomposeByProjector:
    def test_measured_singlet(self, measured_singlet):
        tp = classify_projector(Z_UP, measured_singlet)
        dec = decompose_by_projector(tp, measured_singlet)
        assert isinstance(dec, BiorthogonalDecomposition)
        assert_allclose(dec.weights, [0.5, 0.5], atol=1e-12)
        assert_allclose(dec.terms[0].matrix, np.kron(Z_UP, Z_DOWN), atol=1e-12)
        assert_allclose(dec.terms[1].matrix, np.kron(Z_DOWN, Z_UP), atol=1e-12)
        assert dec.biorthogonal

    def test_bell_weak_branch(self, bell_density):
        out = decompose_by_projector(classify_projector(Z_UP, bell_density), bell_density)
        assert isinstance(out, WeakSplit)

    def test_degenerate(self, measured_singlet):
        tp = classify_projector(np.eye(2), measured_singlet)
        with pytest.raises(DegenerateSplitError):
            decompose_by_projector(tp, measured_singlet)

    def test_random_strong_pairs(self, rng):
        for _ in range(20):
            rho, a1, a2, _ = three_block_state(rng)
            for tp in twin_spectral_projectors((a1, a2), rho).projector_pairs:
                dec = decompose_by_projector(tp, rho)
                assert dec.biorthogonal
                assert np.linalg.norm(dec.reconstruct() - rho.matrix, 2) <= 1e-9


class TestBiorthogonalFromMixture:
    def test_measured_singlet_terms(self):
        a = BipartiteDensity(2, 2, np.kron(Z_UP, Z_DOWN))
        b = BipartiteDensity(2, 2, np.kron(Z_DOWN, Z_UP))
        tp = biorthogonal_from_mixture(a, b, 0.5)
        assert tp.is_strong
        assert_allclose(tp.P1.matrix, Z_UP)
        assert_allclose(tp.P2.matrix, Z_DOWN)

    def test_pure_products(self, rng):
        u1, u2 = random_unitary(3, rng), random_unitary(3, rng)
        a = pure_density(np.kron(u1[:, 0], u2[:, 1]), 3, 3)
        b = pure_density(np.kron(u1[:, 2], u2[:, 0]), 3, 3)
        tp = biorthogonal_from_mixture(a, b, 0.3)
        assert tp.is_strong and tp.P1.rank == 1 and tp.P2.rank == 1

    def test_rejects_overlap(self):
        a = BipartiteDensity(2, 2, np.kron(Z_UP, Z_DOWN))
        c, s = np.cos(0.1), np.sin(0.1)
        v = np.array([s, c])
        b = BipartiteDensity(2, 2, np.kron(np.outer(v, v), Z_UP))
        with pytest.raises(BiorthogonalityError) as err:
            biorthogonal_from_mixture(a, b, 0.5)
        assert err.value.subsystem == 1

    def test_bad_weight(self):
        a = BipartiteDensity(2, 2, np.kron(Z_UP, Z_DOWN))
        with pytest.raises(ValidationError):
            biorthogonal_from_mixture(a, a, 1.0)


class TestStrongMixture:
    def test_measured_singlet(self, measured_singlet):
        dec = strong_mixture((SZ, -SZ), measured_singlet)
        assert_allclose(dec.weights, [0.5, 0.5])
        assert dec.product_terms == (True, True)
        assert dec.biorthogonal

    def test_trivial(self, rng):
        rho = random_density(2, 2, rng=rng)
        dec = strong_mixture((np.eye(2), np.eye(2)), rho)
        assert len(dec.terms) == 1
        assert_allclose(dec.terms[0].matrix, rho.matrix, atol=1e-12)

    def test_three_blocks(self, rng):
        rho, a1, a2, w = three_block_state(rng)
        dec = strong_mixture((a1, a2), rho)
        assert len(dec.terms) == 3
        # eigenvalues 3, 2, 1 carry weights 0.2, 0.3, 0.5
        assert_allclose(dec.weights, w[::-1], atol=1e-12)
        assert dec.biorthogonal and all(dec.product_terms)
        assert len(dec.certificates) == 3

    def test_requires_strong(self, bell_density):
        with pytest.raises(ValidationError):
            strong_mixture((np.diag([1.0, 2]), np.diag([1.0, 2])), bell_density)

    def test_zero_weight_dropped(self):
        # eigenvalue 5 lives only outside the range of rho1, so it never appears;
        # a zero-weight detectable value cannot occur, which the clean run shows
        rho = BipartiteDensity(2, 2, np.kron(Z_UP, Z_UP))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            dec = strong_mixture((np.diag([1.0, 5.0]), np.diag([1.0, 7.0])), rho)
        assert len(dec.terms) == 1


class TestWeakSplit:
    def test_bell(self, bell_density):
        tp = classify_projector(Z_UP, bell_density)
        ws = weak_split_expansion(tp, bell_density)
        assert_allclose(ws.part_in, np.outer(np.kron(UP, UP), BELL) / np.sqrt(2), atol=1e-15)
        assert [len(e) for e in ws.expansions] == [2, 2]
        assert ws.cross_orthogonality
        assert_allclose(ws.combined.weights, [0.5] * 4, atol=1e-10)
        oracle = pure_nonhermitian_expansion(BELL, d1=2, d2=2)
        assert_allclose(ws.combined.weights, oracle.weights, atol=1e-10)

    def test_rejects_strong(self, measured_singlet):
        with pytest.raises(ValidationError):
            weak_split_expansion(classify_projector(Z_UP, measured_singlet), measured_singlet)

    def test_random_pure_2x3(self, rng):
        for _ in range(10):
            phi = random_pure(2, 3, rng)
            rho = phi.density()
            sch = schmidt_state(phi)
            p1 = np.outer(sch.basis1[:, 0], sch.basis1[:, 0].conj())
            p2 = np.outer(sch.basis2[:, 0], sch.basis2[:, 0].conj())
            tp = classify_projector(p1, rho, partner=p2)
            assert not tp.is_strong
            ws = weak_split_expansion(tp, rho)
            assert ws.max_cross <= 1e-9
            assert np.linalg.norm(ws.combined.reconstruct() - rho.matrix, 2) <= 1e-9
            assert ws.purity_sum <= 1 + 1e-10


class TestHSOrthogonality:
    def test_examples(self):
        assert hs_orthogonality_equiv(np.diag([1, 0, 0]), np.diag([0, 0.5, 0.5])) == (True, True)
        assert hs_orthogonality_equiv(np.eye(2) / 2, np.eye(2) / 2) == (False, False)
