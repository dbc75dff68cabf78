import numpy as np
import numpy.testing as npt
import pytest

from todalax.lax import PhasePoint, SignVector, build_lax
from todalax.spectral import annihilator, decompose
from todalax.singularity import (
    PairTarget,
    StratumCollapseError,
    all_pair_targets,
    bracket_relations_check,
    corank,
    find_singular,
    hessian_structure_check,
    omega_point,
    pair_slots,
    pairing_denominator,
    perturbed_seed,
    tangent_symplectic_check,
    transverse_frequency,
)


def random_point(rng, n, scale=1.0):
    return PhasePoint(scale * rng.standard_normal(n), scale * rng.standard_normal(n))


class TestPairBookkeeping:
    def test_slot_counts(self):
        assert pair_slots(2) == (0, 1)
        assert pair_slots(3) == (1, 1)
        assert pair_slots(4) == (1, 2)
        assert pair_slots(8) == (3, 4)

    def test_positions(self):
        assert PairTarget(False, 1).positions(3) == (1, 2)
        assert PairTarget(True, 1).positions(3) == (0, 1)
        assert PairTarget(True, 2).positions(4) == (2, 3)

    def test_ordinal_validation(self):
        with pytest.raises(ValueError):
            PairTarget(False, 1).positions(2)  # no even-class slots at n = 2

    def test_parse_round_trip(self):
        t = PairTarget.parse("odd:2")
        assert t == PairTarget(True, 2)
        assert t.label == "odd:2"
        with pytest.raises(ValueError):
            PairTarget.parse("both:1")


class TestCorank:
    def test_regular_points(self):
        rng = np.random.default_rng(0)
        for n in (2, 4, 6):
            for _ in range(30):
                rep = corank(random_point(rng, n))
                assert rep.corank == 0
                assert rep.nu == rep.nubar == 0
                assert not rep.inconclusive

    def test_omega_points_full_corank(self):
        for n in range(2, 9):
            rep = corank(omega_point(n).z)
            assert rep.corank == n - 1
            assert rep.nu == (n - 1) // 2
            assert rep.nubar == n // 2
            assert rep.theorem_holds
            assert not rep.inconclusive

    def test_null_basis_annihilates_jacobian(self):
        from todalax.dynamics import grad_F

        om = omega_point(5)
        rep = corank(om.z)
        dF = np.array([grad_F(om.z, j).as_vector() for j in range(1, 6)])
        for c in rep.null_basis:
            assert np.linalg.norm(c @ dF) < 1e-10 * rep.singular_values[0]

    def test_json_round_trip(self):
        import json

        rep = corank(omega_point(3).z)
        data = json.loads(json.dumps(rep.to_json_dict()))
        assert data["corank"] == 2
        assert [float(s) for s in data["singular_values"]][0] > 0


class TestOmegaPoint:
    def test_n3_spectra(self):
        om = omega_point(3)
        npt.assert_allclose(om.even_values, [2.0, -1.0, -1.0], atol=1e-15)
        npt.assert_allclose(om.odd_values, [1.0, 1.0, -2.0], atol=1e-15)

    def test_n4_spectra(self):
        om = omega_point(4)
        npt.assert_allclose(om.even_values, [2.0, 0.0, 0.0, -2.0], atol=1e-15)
        s = np.sqrt(2.0)
        npt.assert_allclose(om.odd_values, [s, s, -s, -s], atol=1e-15)

    def test_momentum_shift(self):
        a = omega_point(5, p0=0.0)
        b = omega_point(5, p0=1.3)
        npt.assert_allclose(b.even_values, a.even_values + 1.3)
        npt.assert_allclose(b.odd_values, a.odd_values + 1.3)

    def test_matches_numerical_spectra(self):
        for n in range(2, 9):
            om = omega_point(n, q0=0.7, p0=-0.2)
            lam = np.sort(np.linalg.eigvalsh(build_lax(om.z).entries))[::-1]
            bar = np.sort(np.linalg.eigvalsh(build_lax(om.z, SignVector.odd(n)).entries))[::-1]
            npt.assert_allclose(lam, om.even_values, atol=1e-12)
            npt.assert_allclose(bar, om.odd_values, atol=1e-12)


class TestFindSingular:
    def test_omega_seed_returns_immediately(self):
        om = omega_point(3)
        sp = find_singular(om.z, all_pair_targets(3))
        assert sp.iterations == 0
        npt.assert_array_equal(sp.z.q, om.z.q)

    def test_single_pair_n3(self):
        om = omega_point(3)
        target = PairTarget(True, 1)
        seed = perturbed_seed(om, [PairTarget(False, 1)], eps=1e-2)
        sp = find_singular(seed, [target])
        assert np.max(sp.residual_gaps) < 1e-10
        rep = corank(sp.z)
        assert rep.corank == 1 and rep.nubar == 1 and rep.nu == 0
        # the even-class gap stayed open
        vals = np.sort(np.linalg.eigvalsh(build_lax(sp.z).entries))[::-1]
        assert vals[1] - vals[2] > 1e-3

    def test_all_components_realised_n4(self):
        # every single-pair stratum and every pair of pairs is reachable
        om = omega_point(4)
        targets = all_pair_targets(4)
        assert len(targets) == 3
        for t in targets:
            rest = [u for u in targets if u != t]
            sp = find_singular(perturbed_seed(om, rest), [t])
            assert corank(sp.z).corank == 1
        for i in range(3):
            for j in range(i + 1, 3):
                keep = [targets[i], targets[j]]
                rest = [u for u in targets if u not in keep]
                sp = find_singular(perturbed_seed(om, rest), keep)
                rep = corank(sp.z)
                assert rep.corank == 2 and rep.theorem_holds

    def test_collapse_detection(self):
        # seeding exactly at the equilibrium and asking for one pair keeps the
        # other pairs degenerate too
        om = omega_point(3)
        with pytest.raises(StratumCollapseError):
            find_singular(om.z, [PairTarget(True, 1)])

    def test_json_fields(self):
        om = omega_point(3)
        sp = find_singular(perturbed_seed(om, [PairTarget(False, 1)]), [PairTarget(True, 1)])
        data = sp.to_json_dict()
        assert data["target_pairs"] == ["odd:1"]
        assert len(data["frequencies"]) == 1


class TestTransverseFrequency:
    def test_n2_equilibrium_value(self):
        # the linearised relative oscillation of the two-particle chain
        om = omega_point(2)
        sp = find_singular(om.z, [PairTarget(True, 1)])
        w = transverse_frequency(sp, PairTarget(True, 1))
        assert abs(w) == pytest.approx(2.0, rel=1e-12)

    def test_n3_omega_values(self):
        om = omega_point(3)
        sp = find_singular(om.z, all_pair_targets(3))
        for t in all_pair_targets(3):
            w = transverse_frequency(sp, t)
            assert abs(w) == pytest.approx(2.0 * np.sqrt(3.0), rel=1e-10)

    def test_sign_flips_with_basis_swap_only(self):
        om = omega_point(3)
        sp = find_singular(om.z, all_pair_targets(3))
        t = PairTarget(True, 1)
        spec = decompose(build_lax(sp.z, SignVector.odd(3)))
        u1, u2 = spec.pair_vectors(t.positions(3))
        d12 = pairing_denominator(sp.z, True, u1, u2)
        d21 = pairing_denominator(sp.z, True, u2, u1)
        assert d12 == pytest.approx(-d21)
        assert abs(d12) > 1e-6

    def test_pairing_m_independent(self):
        rng = np.random.default_rng(1)
        om = omega_point(4, p0=float(rng.uniform(-1, 1)))
        for t in all_pair_targets(4):
            sign = SignVector.odd(4) if t.odd_class else SignVector.even(4)
            spec = decompose(build_lax(om.z, sign))
            u1, u2 = spec.pair_vectors(t.positions(4))
            denom = pairing_denominator(om.z, t.odd_class, u1, u2)
            b = om.z.couplings()
            for m in range(4):
                mp = (m + 1) % 4
                via = -4 * b[m] * sign.eps[m] * (u1[mp] * u2[m] - u1[m] * u2[mp])
                assert denom == pytest.approx(via, abs=1e-12)

    def test_requires_degenerate_pair(self):
        rng = np.random.default_rng(2)
        z = random_point(rng, 3)
        with pytest.raises(ValueError):
            transverse_frequency(z, PairTarget(True, 1))


class TestHessianStructure:
    def test_found_point_n3(self):
        om = omega_point(3)
        sp = find_singular(perturbed_seed(om, [PairTarget(False, 1)]), [PairTarget(True, 1)])
        rep = hessian_structure_check(sp, PairTarget(True, 1))
        assert rep.residual_full < 1e-8
        assert rep.omega_relative_error < 1e-8
        assert rep.trace_K_squared < 0
        assert rep.spurious_eigenvalue < 1e-8
        assert rep.passed
        # truncating to the pair's own three dyads leaves an order-one defect
        assert rep.residual_pair_dyads > 0.01

    def test_omega_point_rank_three(self):
        # at the n = 3 equilibrium the simple-eigenvalue dyad aligns with dtau,
        # so the Hessian has rank 3 while the tau coefficient shifts
        om = omega_point(3)
        sp = find_singular(om.z, all_pair_targets(3))
        rep = hessian_structure_check(sp, PairTarget(True, 1))
        assert rep.hessian_rank == 3
        assert rep.residual_full < 1e-8
        assert rep.passed

    def test_trace_matches_frequency(self):
        om = omega_point(3)
        sp = find_singular(perturbed_seed(om, [PairTarget(True, 1)]), [PairTarget(False, 1)])
        rep = hessian_structure_check(sp, PairTarget(False, 1))
        npt.assert_allclose(rep.trace_K_squared, -2.0 * rep.omega_spectrum**2, rtol=1e-6)


class TestBracketRelations:
    def test_omega_points(self):
        for n in (2, 3, 4, 5):
            rep = bracket_relations_check(omega_point(n, p0=0.3).z)
            assert rep.zero_max < 1e-10
            npt.assert_allclose(rep.ratio_errors, 0.0, atol=1e-12)
            assert rep.m_independence_max < 1e-12
            assert rep.mixed_parity_max < 1e-12
            assert rep.conjugate_formula_residual < 1e-12
            assert rep.passed

    def test_found_sigma1_points(self):
        om = omega_point(4)
        targets = all_pair_targets(4)
        for t in targets:
            rest = [u for u in targets if u != t]
            sp = find_singular(perturbed_seed(om, rest), [t])
            rep = bracket_relations_check(sp)
            assert rep.passed, (t.label, rep)

    def test_table_is_antisymmetric(self):
        rep = bracket_relations_check(omega_point(4).z)
        npt.assert_allclose(rep.table, -rep.table.T, atol=1e-15)


class TestGeometricWitnesses:
    def test_tangent_space_symplectic(self):
        om3 = omega_point(3)
        targets = all_pair_targets(3)
        for t in targets:
            rest = [u for u in targets if u != t]
            sp = find_singular(perturbed_seed(om3, rest), [t])
            assert tangent_symplectic_check(sp) > 1e-6

    def test_null_vector_parallel_to_annihilator(self):
        om = omega_point(3)
        sp = find_singular(perturbed_seed(om, [PairTarget(False, 1)]), [PairTarget(True, 1)])
        rep = corank(sp.z)
        assert rep.corank == 1
        spec = decompose(build_lax(sp.z, SignVector.odd(3)))
        ann = annihilator(spec, 0)
        c = ann.coefficients / np.linalg.norm(ann.coefficients)
        null = rep.null_basis[0] / np.linalg.norm(rep.null_basis[0])
        angle = min(np.linalg.norm(null - c), np.linalg.norm(null + c))
        assert angle < 1e-6

    def test_regular_point_has_no_tangent_data(self):
        rng = np.random.default_rng(3)
        with pytest.raises(ValueError):
            tangent_symplectic_check(random_point(rng, 3))
