import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strategies import rng_for, seeds
from tensorphase import fixtures
from tensorphase.blocks import block_2x2
from tensorphase.control import (
    STABILITY_CSV_HEADER, FrequencyGrid, MltiSystem, closed_loop_oracle, cone_condition_check,
    freq_phase_profile, gang_of_four, hinf_norm, random_stable_system, small_gain_check,
    small_phase_check, transfer_at,
)
from tensorphase.errors import DomainError, PoleError, ShapeError, WellPosednessError
from tensorphase.phase import phases
from tensorphase.tensor import DenseTensor, identity, zeros

D22 = (2, 2)
EYE = np.eye(4)


def static(M):
    return MltiSystem.static(DenseTensor(np.asarray(M, dtype=complex), D22, D22))


def lag(gain=1.0):
    return MltiSystem.scalar(-1.0, gain, 1.0, 0.0, D22)


def as_tensor(M):
    return DenseTensor(M, D22, D22)


class TestSystem:
    def test_shapes(self):
        with pytest.raises(ShapeError):
            MltiSystem(identity(D22), identity(D22), identity(D22), identity((4,)))

    def test_stability_flag(self):
        assert lag().is_stable()
        assert not MltiSystem.scalar(1.0, 1, 1, 0, D22).is_stable()
        assert not MltiSystem.scalar(-1e-11, 1, 1, 0, D22).is_stable()

    def test_grid(self):
        g = FrequencyGrid.default()
        assert len(g.omegas) == 401 and g.omegas[0] == 0 and g.includes_infinity
        assert g.omegas[1] == pytest.approx(1e-3) and g.omegas[-1] == pytest.approx(1e3)
        with pytest.raises(DomainError):
            FrequencyGrid(np.array([1.0, 0.5]))
        assert "not certified" in g.describe()


class TestTransfer:
    def test_no_output_map(self):
        rng = rng_for(0)
        D = rng.standard_normal((4, 4))
        sysm = MltiSystem.from_matrices(-np.eye(4), rng.standard_normal((4, 4)), np.zeros((4, 4)), D, D22)
        for s in (0.3j, 2.0, 1 + 1j, math.inf):
            np.testing.assert_array_equal(transfer_at(sysm, s).matrix, D)

    @pytest.mark.parametrize("w", [0.0, 0.5, 3.0])
    def test_scalar(self, w):
        sysm = MltiSystem.scalar(-1.0, 1.0, 1.0, 0.0, (1,))
        assert transfer_at(sysm, 1j * w).matrix[0, 0] == pytest.approx(1 / (1j * w + 1), abs=1e-15)

    @given(seed=seeds)
    def test_dc_gain(self, seed):
        sysm = random_stable_system(D22, seed, "random")
        A, B, C, D = (getattr(sysm, k).matrix for k in "ABCD")
        expected = D - C @ np.linalg.solve(A, B)
        np.testing.assert_allclose(transfer_at(sysm, 0.0).matrix, expected, atol=1e-9)

    @given(seed=seeds, w=st.floats(1e-3, 1e3))
    def test_conjugate_symmetry(self, seed, w):
        sysm = random_stable_system(D22, seed, "random")
        a, b = transfer_at(sysm, 1j * w).matrix, transfer_at(sysm, -1j * w).matrix
        assert np.max(np.abs(b - a.conj())) <= 1e-12 * max(1.0, np.abs(a).max())

    def test_pole(self):
        with pytest.raises(PoleError):
            transfer_at(lag(), -1.0)


class TestHinf:
    def test_static(self):
        rng = rng_for(2)
        D = rng.standard_normal((4, 4))
        assert hinf_norm(static(D)).norm == pytest.approx(np.linalg.norm(D, 2), rel=1e-12)

    def test_lag(self):
        res = hinf_norm(lag())
        assert res.norm == pytest.approx(1.0, abs=1e-12) and res.omega == 0.0

    @pytest.mark.parametrize("seed", range(4))
    def test_dense_grid_oracle(self, seed):
        sysm = random_stable_system(D22, seed, "random")
        coarse = hinf_norm(sysm, FrequencyGrid.log(1e-3, 1e3, 512)).norm
        w = np.concatenate([[0.0], np.logspace(-3, 3, 8192)])
        dense = max(np.linalg.norm(transfer_at(sysm, 1j * x).matrix, 2) for x in w)
        dense = max(dense, np.linalg.norm(sysm.D.matrix, 2))
        assert abs(coarse - dense) <= 1e-4 * max(1.0, dense)

    def test_unstable(self):
        with pytest.raises(DomainError):
            hinf_norm(MltiSystem.scalar(0.5, 1, 1, 0, D22))


class TestProfile:
    def test_lag(self):
        prof = freq_phase_profile(lag())
        for p in prof[:-1]:
            assert p.sectorial
            assert p.phi_max == pytest.approx(-math.atan(p.omega), abs=1e-9)
            assert p.phi_min == pytest.approx(-math.atan(p.omega), abs=1e-9)
        assert math.isinf(prof[-1].omega) and not prof[-1].sectorial

    def test_imaginary_static(self):
        for p in freq_phase_profile(static(1j * EYE)):
            assert p.phi_max == pytest.approx(math.pi / 2) and p.phi_min == pytest.approx(math.pi / 2)

    def test_static_sectorial(self):
        D = fixtures.random_sectorial(D22, (-0.5, 1.0), 3)
        ref = phases(D)
        for p in freq_phase_profile(static(D.matrix), FrequencyGrid.log(1e-2, 1e2, 20)):
            assert p.phi_max == pytest.approx(ref.phi_max, abs=1e-9)
            assert p.phi_min == pytest.approx(ref.phi_min, abs=1e-9)

    def test_continuation_past_pi(self):
        # 1/(s+1)^3 per channel: phase runs down to -3 pi/2, beyond the principal branch
        A = np.kron(np.eye(4), np.array([[-1.0, 1, 0], [0, -1, 1], [0, 0, -1]]))
        sel = np.kron(np.eye(4), np.array([[0.0], [0], [1]]))
        out = np.kron(np.eye(4), np.array([[1.0, 0, 0]]))
        # realize through the 12-state cascade folded into a 4x4 transfer
        G = lambda w: out @ np.linalg.solve(1j * w * np.eye(12) - A, sel)  # noqa: E731
        assert np.allclose(G(1.0), np.eye(4) / (1j + 1) ** 3)
        # the profile continuation is a pure function of successive centers
        from tensorphase.control import _continue
        from tensorphase.phase import matrix_phases
        prev, last = None, None
        for w in np.logspace(-2, 2, 200):
            ph = _continue(matrix_phases(G(w)), prev)
            prev = 0.5 * (ph[0] + ph[-1])
            last = ph[0]
            assert ph[0] == pytest.approx(-3 * math.atan(w), abs=1e-8)
        assert last < -math.pi


class TestSmallPhase:
    def test_lag_pair(self):
        rep = small_phase_check(lag(), lag(), with_gain=True)
        assert rep.small_phase == "pass" and rep.oracle == "stable"
        assert rep.small_gain == "fail"
        assert rep.hinf_g == pytest.approx(1.0) and rep.hinf_h == pytest.approx(1.0)
        assert any("sufficient" in n for n in rep.notes)
        assert all(r.margin_hi > 0 and r.margin_lo > 0 for r in rep.records if not r.skipped)

    def test_boundary(self):
        assert small_phase_check(static(1j * EYE), static(1j * EYE)).small_phase == "fail"

    def test_rotated_static(self):
        G = static(np.exp(1j) * EYE)
        rep = small_phase_check(G, G)
        assert rep.small_phase == "pass" and rep.oracle == "stable"
        assert rep.min_margins()[0] == pytest.approx(math.pi - 2.0)

    def test_inapplicable(self):
        D = np.diag([1, -1, 1j, -1j])
        assert small_phase_check(static(D), static(EYE)).small_phase == "inapplicable"

    def test_unstable_open_loop(self):
        with pytest.raises(DomainError):
            small_phase_check(MltiSystem.scalar(1.0, 1, 1, 0, D22), lag())

    def test_csv(self):
        text = small_phase_check(lag(), lag(), FrequencyGrid.log(0.1, 10, 5)).to_csv()
        lines = text.splitlines()
        assert lines[0] == ",".join(STABILITY_CSV_HEADER)
        assert len(lines) == 1 + 7


class TestSmallGain:
    def test_examples(self):
        half = static(0.5 * EYE)
        assert small_gain_check(half, half).verdict == "pass"
        one = static(EYE)
        assert small_gain_check(one, one).verdict == "fail"
        assert small_gain_check(lag(), lag()).verdict == "fail"


def direct_gof(G, H, s):
    g, h = transfer_at(G, s).matrix, transfer_at(H, s).matrix
    I = np.eye(4)
    T = np.linalg.inv(np.block([[I, g], [-h, I]]))
    blocks = [as_tensor(T[:4, :4]), as_tensor(T[:4, 4:]), as_tensor(T[4:, :4]), as_tensor(T[4:, 4:])]
    return block_2x2(*blocks, 1).matrix


class TestGangOfFour:
    def test_open_loop(self):
        G = random_stable_system(D22, 1, "random")
        H = static(np.zeros((4, 4)))
        gof = gang_of_four(G, H)
        assert gof.dims == (4, 2)
        s = 0.7j
        g = transfer_at(G, s).matrix
        I = np.eye(4)
        expected = block_2x2(as_tensor(I), as_tensor(-g), as_tensor(0 * I), as_tensor(I), 1).matrix
        np.testing.assert_allclose(transfer_at(gof, s).matrix, expected, atol=1e-10)

    def test_zero_pair(self):
        Z = static(np.zeros((4, 4)))
        gof = gang_of_four(Z, Z)
        np.testing.assert_allclose(transfer_at(gof, 1j).matrix, np.eye(8), atol=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_agreement(self, seed):
        G = random_stable_system(D22, seed, "random")
        H = random_stable_system(D22, seed + 100, "passive")
        gof = gang_of_four(G, H)
        rng = rng_for(seed)
        for w in rng.uniform(0, 20, 20):
            try:
                ref = direct_gof(G, H, 1j * w)
            except np.linalg.LinAlgError:
                continue
            got = transfer_at(gof, 1j * w).matrix
            assert np.max(np.abs(got - ref)) <= 1e-8 * max(1.0, np.abs(ref).max())

    def test_ill_posed(self):
        with pytest.raises(WellPosednessError):
            gang_of_four(static(EYE), static(-EYE))


class TestOracle:
    def test_examples(self):
        assert closed_loop_oracle(lag(), lag()) == "stable"
        assert closed_loop_oracle(lag(2.0), static(-EYE)) == "unstable"
        assert closed_loop_oracle(static(EYE), static(-EYE)) == "ill-posed"

    def test_matches_scalar_roots(self):
        # G = k/(s+1), H = 1: closed-loop pole at s = -1 - k
        for k in (-3.0, -1.0, -0.5, 0.5, 2.0):
            verdict = closed_loop_oracle(lag(k), static(EYE))
            assert verdict == ("stable" if -1 - k < 0 else "unstable")


class TestConeCheck:
    def test_examples(self):
        assert cone_condition_check(static(0.5 * EYE), [1], [1]).verdict == "pass"
        assert cone_condition_check(static(1j * EYE), [1], [1]).verdict == "pass"
        assert cone_condition_check(static(np.exp(2j) * EYE), [1], [1]).verdict == "fail"

    def test_lag_weight(self):
        # h = (s+2)/(s+1) has small positive phase lead; G = 1/(s+1) stays inside
        assert cone_condition_check(lag(), [1, 2], [1, 1]).verdict == "pass"

    def test_unstable_weight(self):
        with pytest.raises(DomainError):
            cone_condition_check(lag(), [1, -1], [1, 1])
        with pytest.raises(DomainError):
            cone_condition_check(lag(), [1], [1, 1])


class TestGenerators:
    @pytest.mark.parametrize("kind", ["passive", "lag", "random"])
    def test_stable_deterministic(self, kind):
        for seed in range(10):
            a = random_stable_system(D22, seed, kind)
            b = random_stable_system(D22, seed, kind)
            assert a.is_stable()
            assert all(np.array_equal(getattr(a, k).matrix, getattr(b, k).matrix) for k in "ABCD")

    def test_passive_is_frequency_wise_sectorial(self):
        G = random_stable_system(D22, 4, "passive")
        assert all(p.sectorial for p in freq_phase_profile(G))

    def test_unknown(self):
        with pytest.raises(DomainError):
            random_stable_system(D22, 0, "chaotic")
