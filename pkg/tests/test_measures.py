import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.optimize import minimize

from mixedent import measures as M
from mixedent import states
from mixedent.errors import InvalidInputError
from mixedent.linalg import partial_trace

from conftest import random_density, random_product_state, wootters_oracle

spectra4 = st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4).filter(
    lambda v: sum(v) > 1e-3).map(lambda v: np.array(v) / sum(v))


def fef_oracle(rho, restarts=12, seed=0):
    """Maximise <phi|rho|phi> over (U x 1)|phi+> by random-restart search."""
    phi = states.BELL_STATES["phi+"]
    rng = np.random.default_rng(seed)

    def neg(t):
        a, b, c = t
        u = np.array([[np.cos(a) * np.exp(1j * b), np.sin(a) * np.exp(1j * c)],
                      [-np.sin(a) * np.exp(-1j * c), np.cos(a) * np.exp(-1j * b)]])
        v = np.kron(u, np.eye(2)) @ phi
        return -np.real(v.conj() @ rho @ v)

    return max(-minimize(neg, rng.uniform(0, 2 * np.pi, 3), method="Nelder-Mead",
                         options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000}).fun
               for _ in range(restarts))


class TestConcurrence:
    def test_bell(self, phi_plus):
        assert M.concurrence(phi_plus).C == pytest.approx(1.0, abs=1e-12)

    def test_maximally_mixed(self):
        d = M.concurrence(np.eye(4) / 4)
        assert d.C == 0.0
        assert_allclose(d.lambdas, [0.25] * 4, atol=1e-14)

    def test_werner(self, werner):
        assert M.concurrence(werner).C == pytest.approx(0.2, abs=1e-12)

    def test_detail_invariant(self, rng):
        for _ in range(100):
            d = M.concurrence(random_density(rng))
            assert np.all(np.diff(d.lambdas) <= 0) and np.all(d.lambdas >= 0)
            assert d.C == pytest.approx(max(0.0, d.lambdas[0] - d.lambdas[1:].sum()), abs=1e-12)

    @pytest.mark.parametrize("rank", [1, 2, 3, 4])
    def test_against_oracle(self, rng, rank):
        for _ in range(300):
            rho = random_density(rng, rank)
            assert M.concurrence(rho).C == pytest.approx(wootters_oracle(rho), abs=1e-7)

    def test_pure_state_closed_form(self, rng):
        for _ in range(100):
            psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            psi /= np.linalg.norm(psi)
            expected = 2 * abs(psi[0] * psi[3] - psi[1] * psi[2])
            assert M.concurrence(states.projector(psi)).C == pytest.approx(expected, abs=1e-10)


class TestConcurrenceIH:
    @pytest.mark.parametrize("p,c", [
        ((1, 0, 0, 0), 1.0),
        ((0.5, 0.25, 0.15, 0.10), 0.35 - 2 * math.sqrt(0.025)),
        ((0.3, 0.3, 0.3, 0.1), 0.0),
    ])
    def test_values(self, p, c):
        assert M.concurrence_ih(p) == pytest.approx(c, abs=1e-12)

    def test_example_value(self):
        assert M.concurrence_ih((0.5, 0.25, 0.15, 0.10)) == pytest.approx(0.033772, abs=1e-6)

    def test_matches_wootters_on_random_spectra(self, rng):
        p = -np.sort(-rng.dirichlet(np.ones(4), 10_000), axis=1)
        rho = states.ih_states(p)
        c_batch = M.batch_measures(rho, fef=False)["C"]
        assert_allclose(c_batch, M.concurrence_ih_batch(p), atol=1e-10)
        for i in range(0, 10_000, 500):
            assert M.concurrence(rho[i]).C == pytest.approx(M.concurrence_ih(p[i]), abs=1e-10)


class TestEoF:
    @pytest.mark.parametrize("c,e", [(0.0, 0.0), (1.0, 1.0), (0.5, 0.354579)])
    def test_values(self, c, e):
        assert M.entanglement_of_formation(c) == pytest.approx(e, abs=1e-6)

    def test_half_exact(self):
        x = (1 + math.sqrt(0.75)) / 2
        h = -x * math.log2(x) - (1 - x) * math.log2(1 - x)
        assert M.entanglement_of_formation(0.5) == pytest.approx(h, abs=1e-15)

    def test_monotone(self):
        e = M.entanglement_of_formation(np.linspace(0, 1, 1001))
        assert np.all(np.diff(e) > 0)
        assert e[0] == 0.0 and e[-1] == 1.0

    def test_no_negative_zero(self):
        assert math.copysign(1.0, M.entanglement_of_formation(0.0)) == 1.0

    def test_rejects(self):
        with pytest.raises(InvalidInputError):
            M.entanglement_of_formation(1.5)


class TestParticipationRatio:
    def test_pure(self, phi_plus):
        assert M.participation_ratio(phi_plus) == pytest.approx(1.0)

    def test_mixed(self):
        assert M.participation_ratio(np.eye(4) / 4) == pytest.approx(4.0)

    def test_mems(self):
        assert M.participation_ratio(states.mems(2 / 3)) == pytest.approx(1.8, abs=1e-12)

    def test_matches_spectrum(self, rng):
        rho = random_density(rng)
        p = np.linalg.eigvalsh(rho)
        assert M.participation_ratio(rho) == pytest.approx(1 / np.sum(p ** 2), rel=1e-12)


class TestEntropies:
    @pytest.mark.parametrize("q", [0.5, 2, 3, M.Q1, M.QINF])
    def test_pure_zero(self, q):
        assert M.renyi_entropy([1, 0, 0, 0], q) == pytest.approx(0.0, abs=1e-15)
        if q != M.QINF:
            assert M.tsallis_entropy([1, 0, 0, 0], q) == pytest.approx(0.0, abs=1e-15)

    def test_uniform_q2(self):
        assert M.renyi_entropy([0.25] * 4, 2) == pytest.approx(2.0)
        assert M.tsallis_entropy([0.25] * 4, 2) == pytest.approx(0.75)

    def test_qinf(self):
        assert M.renyi_entropy([0.9, 0.1], M.QINF, base=math.e) == pytest.approx(-math.log(0.9))
        assert M.renyi_entropy([0.9, 0.1], M.QINF, base=math.e) == pytest.approx(0.10536, abs=1e-5)

    def test_vn_bracket(self, rng):
        for _ in range(50):
            p = rng.dirichlet(np.ones(4))
            vn = M.von_neumann_entropy(p)
            lo, hi = M.renyi_entropy(p, 1 + 1e-4), M.renyi_entropy(p, 1 - 1e-4)
            assert lo <= vn <= hi
            assert abs(hi - vn) < 1e-4 and abs(vn - lo) < 1e-4

    def test_large_q_approaches_min_entropy(self, rng):
        for _ in range(200):
            p = rng.dirichlet(np.ones(4))
            gap = M.renyi_entropy(p, 100) - M.renyi_entropy(p, M.QINF)
            # 0 <= S_q - S_inf <= -log2(p_max) / (q - 1)
            assert -1e-12 <= gap <= -math.log2(p.max()) / 99 + 1e-12

    def test_large_q_close_for_dominant_eigenvalue(self):
        p = np.array([0.95, 0.03, 0.015, 0.005])
        assert M.renyi_entropy(p, 100) == pytest.approx(M.renyi_entropy(p, M.QINF), abs=1e-3)

    @pytest.mark.parametrize("q", [0, -1])
    def test_rejects_q(self, q):
        with pytest.raises(InvalidInputError):
            M.renyi_entropy([0.5, 0.5], q)
        with pytest.raises(InvalidInputError):
            M.tsallis_entropy([0.5, 0.5], q)

    def test_tsallis_has_no_inf(self):
        with pytest.raises(InvalidInputError):
            M.tsallis_entropy([0.5, 0.5], M.QINF)

    def test_tsallis_q1_is_vn_nats(self):
        p = [0.5, 0.3, 0.2]
        assert M.tsallis_entropy(p, M.Q1) == pytest.approx(M.von_neumann_entropy(p, math.e))

    def test_clipping(self):
        p = M.clean_spectrum([0.5, 0.5 + 5e-11, -5e-11, 0.0])
        assert np.all(p >= 0) and p.sum() == pytest.approx(1.0, abs=1e-15)
        with pytest.raises(InvalidInputError):
            M.clean_spectrum([0.6, 0.6, -0.2, 0.0])

    def test_roundoff_eigenvalues_do_not_leak_at_small_q(self, rng):
        from conftest import random_product_state

        a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = np.kron(a, b)
        rho = np.outer(v, v.conj()) / np.vdot(v, v).real
        for side in "AB":
            assert M.conditional_renyi(rho, 0.5, side) == 0.0
        assert M.classical_inequalities_hold(rho, (0.5, 2.0, M.QINF))
        assert M.classical_inequalities_hold(random_product_state(rng), (0.5,))

    @settings(max_examples=200, deadline=None)
    @given(p=spectra4, q=st.sampled_from([0.5, 2.0, 3.0, 5.0]))
    def test_tsallis_renyi_map(self, p, q):
        t = M.tsallis_entropy(p, q)
        r = M.renyi_entropy(p, q, base=math.e)
        assert M.tsallis_from_renyi(r, q) == pytest.approx(t, rel=1e-10, abs=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(p=spectra4, q=st.floats(0.1, 20))
    def test_renyi_bounds(self, p, q):
        s = M.renyi_entropy(p, q)
        assert -1e-12 <= s <= 2 + 1e-12
        assert s >= M.renyi_entropy(p, M.QINF) - 1e-12


class TestConditional:
    @pytest.mark.parametrize("q", [0.5, 2, 3])
    def test_tsallis_product(self, rng, q):
        from conftest import random_density_qubit

        a, b = random_density_qubit(rng), random_density_qubit(rng)
        rho = np.kron(a, b)
        assert M.conditional_tsallis(rho, q, "B") == pytest.approx(
            M.tsallis_entropy(np.linalg.eigvalsh(a), q), abs=1e-12)

    def test_tsallis_bell(self, phi_plus):
        assert M.conditional_tsallis(phi_plus, 2) == pytest.approx(-1.0, abs=1e-12)

    def test_tsallis_mixed(self):
        assert M.conditional_tsallis(np.eye(4) / 4, 2) == pytest.approx(0.5, abs=1e-12)

    def test_renyi_bell(self, phi_plus):
        assert M.conditional_renyi(phi_plus, M.QINF, base=math.e) == pytest.approx(-math.log(2))

    def test_renyi_mems_branch_point(self):
        assert M.conditional_renyi(states.mems(2 / 3), M.QINF) == pytest.approx(0.0, abs=1e-12)

    def test_renyi_mems_09(self):
        v = M.conditional_renyi(states.mems(0.9), M.QINF)
        assert v == pytest.approx(math.log2(0.55 / 0.9), abs=1e-12)
        assert v == pytest.approx(-0.71049, abs=1e-5)

    def test_given_label(self, phi_plus):
        with pytest.raises(InvalidInputError):
            M.conditional_renyi(phi_plus, 2, given="C")

    @pytest.mark.parametrize("q", [0.5, 2, 3, 5])
    def test_sign_equivalence(self, rng, q):
        for _ in range(300):
            rho = random_density(rng, rank=int(rng.integers(1, 5)))
            for side in "AB":
                t = M.conditional_tsallis(rho, q, side)
                r = M.conditional_renyi(rho, q, side)
                if abs(r) > 1e-9:
                    assert np.sign(t) == np.sign(r)

    def test_classical_examples(self, rng, phi_plus):
        assert M.classical_inequalities_hold(random_product_state(rng))
        assert not M.classical_inequalities_hold(phi_plus)
        rho = states.mems(0.5)
        assert M.classical_inequalities_hold(rho, (M.QINF,))
        assert M.concurrence(rho).C == pytest.approx(0.5)
        assert M.conditional_renyi(rho, M.QINF, base=math.e) == pytest.approx(math.log((2 / 3) / (7 / 12)))


class TestFEF:
    def test_bell(self, phi_plus):
        assert M.fully_entangled_fraction(phi_plus) == pytest.approx(1.0)

    def test_mixed(self):
        assert M.fully_entangled_fraction(np.eye(4) / 4) == pytest.approx(0.25)

    def test_werner(self, werner):
        assert M.fully_entangled_fraction(werner) == pytest.approx(0.6, abs=1e-12)
        assert fef_oracle(werner) == pytest.approx(0.6, abs=1e-8)

    def test_against_optimiser(self, rng):
        for k in range(15):
            rho = random_density(rng, rank=int(rng.integers(1, 5)))
            assert M.fully_entangled_fraction(rho) == pytest.approx(fef_oracle(rho, seed=k), abs=1e-6)

    def test_batch_matches_scalar(self, rng):
        rhos = np.array([random_density(rng) for _ in range(50)])
        b = M.batch_fully_entangled_fraction(rhos)
        assert_allclose(b, [M.fully_entangled_fraction(r) for r in rhos], atol=1e-13)


class TestPPT:
    def test_product(self, rng):
        assert M.is_ppt(random_product_state(rng))

    def test_bell(self, phi_plus):
        assert not M.is_ppt(phi_plus)
        assert M.ppt_min_eigenvalue(phi_plus) == pytest.approx(-0.5)

    def test_agrees_with_concurrence(self, rng):
        for _ in range(500):
            rho = random_density(rng, rank=int(rng.integers(1, 5)))
            assert M.is_ppt(rho) == (M.concurrence(rho).C <= 1e-10)


class TestFloor:
    @pytest.mark.parametrize("R,c", [(1.0, 1.0), (1.8, (math.sqrt(11.88) - 1.8) / 3.6), (3.0, 0.0)])
    def test_values(self, R, c):
        assert M.ih_concurrence_floor(R) == pytest.approx(c, abs=1e-14)

    def test_example_value(self):
        assert M.ih_concurrence_floor(1.8) == pytest.approx(0.457428, abs=1e-6)

    def test_omega_form(self):
        for R in np.linspace(1, 3, 20):
            w = 1 / R
            assert M.ih_concurrence_floor(R) == pytest.approx((math.sqrt(12 * w - 3) - 1) / 2, abs=1e-12)

    @pytest.mark.parametrize("R", [0.9, 3.5])
    def test_rejects(self, R):
        with pytest.raises(InvalidInputError):
            M.ih_concurrence_floor(R)


class TestRecord:
    def test_mixed(self):
        r = M.measure_record(np.eye(4) / 4)
        assert (r.C, r.R, r.lambda_max, r.entangled, r.classical_ineq) == (0.0, pytest.approx(4.0), pytest.approx(0.25), False, True)

    def test_bell(self, phi_plus):
        r = M.measure_record(phi_plus)
        assert r.C == pytest.approx(1) and r.E == pytest.approx(1) and r.R == pytest.approx(1)
        assert r.lambda_max == pytest.approx(1) and r.entangled and not r.classical_ineq

    def test_mems_09(self):
        r = M.measure_record(states.mems(0.9))
        assert r.C == pytest.approx(0.9, abs=1e-12)
        assert r.R == pytest.approx(1.21951, abs=1e-5)
        assert r.lambda_max == pytest.approx(0.9)
        assert r.Sinf_AB == pytest.approx(-0.71049, abs=1e-5)

    def test_tsallis_entries(self):
        r = M.measure_record(states.mems(0.5), qset=(2.0, M.QINF))
        ab, ba = r.tsallis[2.0]
        assert ab == pytest.approx(M.conditional_tsallis(states.mems(0.5), 2, "B"))
        assert ba == pytest.approx(M.conditional_tsallis(states.mems(0.5), 2, "A"))
        assert set(r.as_dict()["tsallis"]) == {"2.0"}

    def test_batch_matches_record(self, rng):
        rhos = np.array([random_density(rng, rank=int(rng.integers(1, 5))) for _ in range(100)])
        cols = M.batch_measures(rhos, qset=(0.5, 2.0, M.QINF))
        for i, rho in enumerate(rhos):
            r = M.measure_record(rho, qset=(0.5, 2.0, M.QINF))
            for name in M.RECORD_COLUMNS:
                v = cols[name][i]
                if isinstance(getattr(r, name), bool):
                    assert bool(v) == getattr(r, name)
                else:
                    assert v == pytest.approx(getattr(r, name), abs=1e-10)

    def test_record_ranges(self, rng):
        for _ in range(200):
            r = M.measure_record(random_density(rng))
            assert 1 <= r.R <= 4 and 0.25 <= r.lambda_max <= 1
            assert 0 <= r.C <= 1 and 0 <= r.E <= 1


def test_spectrum_level_reduced_equality_is_what_holds():
    rho = states.mems(0.5)
    a, b = partial_trace(rho, "A"), partial_trace(rho, "B")
    assert not np.allclose(a, b)
    assert_allclose(M.spectrum(a), M.spectrum(b))
