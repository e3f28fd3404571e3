import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from haptic_maze.controller import (
    ImpedanceProfile,
    ProfileMode,
    StiffnessParams,
    cartesian_force,
    make_profile,
    self_tune,
    tuning_direction,
)
from haptic_maze.vecmath import InvalidParams

Z = np.zeros(3)
finite = st.floats(-1.0, 1.0, allow_nan=False)
vecs = st.tuples(finite, finite, finite).map(np.array)
directions = vecs.filter(lambda v: np.linalg.norm(v) > 1e-3)


def profile_with(K, D=None, mode=ProfileMode.SELF_TUNING):
    return ImpedanceProfile(np.asarray(K, float), np.zeros((3, 3)) if D is None else np.asarray(D, float),
                            StiffnessParams(), mode)


class TestParams:
    def test_defaults(self):
        p = StiffnessParams()
        assert (p.k_max, p.k_min, p.zeta) == (1000.0, 300.0, 0.7)
        assert p.d_max == pytest.approx(44.2718872, abs=1e-7)
        assert p.d_min == pytest.approx(24.2487113, abs=1e-7)

    @pytest.mark.parametrize("kw", [dict(k_min=0), dict(k_min=2000), dict(zeta=0), dict(zeta=1.5)])
    def test_invalid(self, kw):
        with pytest.raises(InvalidParams):
            StiffnessParams(**kw)


class TestCartesianForce:
    def test_diagonal_gain(self):
        prof = profile_with(np.diag([1000, 300, 300]))
        f = cartesian_force(prof, np.array([0.01, 0, 0]), Z, Z, Z)
        np.testing.assert_allclose(f, [10, 0, 0])

    def test_equilibrium(self):
        prof = make_profile("SelfTuning")
        x = np.array([0.3, -0.2, 0.0])
        v = np.array([0.01, 0.02, 0.0])
        np.testing.assert_array_equal(cartesian_force(prof, x, x, v, v), Z)

    def test_rotated_gain(self):
        prof = profile_with([[650, 350, 0], [350, 650, 0], [0, 0, 300]])
        f = cartesian_force(prof, np.array([0.01, -0.01, 0]), Z, Z, Z)
        # hand multiply: 650*0.01 - 350*0.01 = 3
        np.testing.assert_allclose(f, [3.0, -3.0, 0.0], atol=1e-12)

    def test_damping_term(self):
        prof = make_profile("HighConstant")
        f = cartesian_force(prof, Z, Z, np.array([0.04, 0, 0]), Z)
        np.testing.assert_allclose(f, [0.04 * 2 * 0.7 * np.sqrt(1000), 0, 0])

    @given(vecs, vecs, st.floats(-10, 10))
    def test_linear(self, dx, dv, a):
        prof = make_profile("SelfTuning", direction=np.array([0.6, 0.8, 0.0]))
        f1 = cartesian_force(prof, dx, Z, dv, Z)
        fa = cartesian_force(prof, a * dx, Z, a * dv, Z)
        np.testing.assert_allclose(fa, a * f1, rtol=1e-12, atol=1e-12 * (1 + np.abs(a * f1).max()))


class TestProfiles:
    def test_constant_modes(self):
        hi = make_profile("HighConstant")
        lo = make_profile("LowConstant")
        np.testing.assert_array_equal(hi.K, 1000 * np.eye(3))
        np.testing.assert_array_equal(lo.K, 300 * np.eye(3))
        np.testing.assert_allclose(hi.D, 2 * 0.7 * np.sqrt(1000) * np.eye(3))
        np.testing.assert_allclose(lo.D, 2 * 0.7 * np.sqrt(300) * np.eye(3))

    def test_self_tuning_spectrum(self):
        prof = make_profile(ProfileMode.SELF_TUNING, direction=np.array([0.0, 1.0, 0.0]))
        np.testing.assert_allclose(np.linalg.eigvalsh(prof.K), [300, 300, 1000])
        np.testing.assert_allclose(prof.K @ np.array([0, 1.0, 0]), [0, 1000, 0], atol=1e-9)


class TestSelfTune:
    def test_along_x(self):
        prof = self_tune(make_profile("SelfTuning", direction=np.array([0, 1.0, 0])), np.array([1.0, 0, 0]))
        np.testing.assert_allclose(prof.K, np.diag([1000, 300, 300]), atol=1e-12)

    def test_degenerate_unchanged(self):
        prof = make_profile("SelfTuning", direction=np.array([0.3, 0.4, 0]))
        assert self_tune(prof, Z) is prof

    def test_diagonal(self):
        prof = self_tune(make_profile("SelfTuning"), np.array([1.0, 1.0, 0]))
        np.testing.assert_allclose(prof.K, [[650, 350, 0], [350, 650, 0], [0, 0, 300]], atol=1e-9)
        d_max, d_min = prof.params.d_max, prof.params.d_min
        s = 0.5 * (d_max - d_min)
        np.testing.assert_allclose(prof.D, [[d_min + s, s, 0], [s, d_min + s, 0], [0, 0, d_min]], atol=1e-9)

    @pytest.mark.parametrize("mode", ["HighConstant", "LowConstant"])
    def test_constant_modes_never_change(self, mode):
        prof = make_profile(mode)
        K0, D0 = prof.K.copy(), prof.D.copy()
        for v in np.random.default_rng(0).normal(size=(20, 3)):
            prof = self_tune(prof, v)
        np.testing.assert_array_equal(prof.K, K0)
        np.testing.assert_array_equal(prof.D, D0)

    @given(st.lists(vecs, min_size=1, max_size=12))
    def test_major_axis_follows_last_direction(self, seq):
        prof = make_profile("SelfTuning")
        last = np.array([1.0, 0, 0])
        for v in seq:
            prof = self_tune(prof, v)
            if np.linalg.norm(v) > 1e-9:
                last = v
        w, vecs_ = np.linalg.eigh(prof.K)
        assert abs(vecs_[:, 2] @ last) / np.linalg.norm(last) > 1 - 1e-9

    @given(directions)
    def test_directional_stiffness(self, v):
        prof = self_tune(make_profile("SelfTuning"), v)
        u = prof.basis
        assert u[:, 0] @ prof.K @ u[:, 0] == pytest.approx(1000, abs=1e-9)
        assert u[:, 1] @ prof.K @ u[:, 1] == pytest.approx(300, abs=1e-9)
        assert u[:, 2] @ prof.K @ u[:, 2] == pytest.approx(300, abs=1e-9)
        assert prof.major_direction @ v > 0


class TestTuningDirection:
    def test_examples(self):
        prev = np.array([0, 1.0, 0])
        inc = np.array([4e-5, 0, 0])
        assert tuning_direction(inc, prev) is inc
        assert tuning_direction(Z, prev) is prev
        assert tuning_direction(np.array([1e-12, 0, 0]), prev) is prev
