import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EXAMPLE_DELTAS, EXAMPLE_TABLE, EXAMPLE_TAU, random_specs
from oaiflex.errors import BetaUndefined, NotElliptic, OutOfRange, RightAngle
from oaiflex.planar import (
    SIGN_PATTERN,
    BaseAngles,
    PolyhedronSpec,
    RCQuadruple,
    XYSParams,
    build_spec,
    coefficient_table,
    deltas_to_xys,
    eq8_residual,
    eq9_residual,
    forms,
    matching_shifts,
    normalize_enumeration,
    r1_of,
    r1_raw,
    rc_quadruple,
    rc_to_lambda_mu,
    recover_angles,
    shift_spec,
    sign_pattern,
    sigma_assignments,
    xys_to_deltas,
    z_values,
)
from oaiflex.screening import stage_codes

EXAMPLE_P = deltas_to_xys(EXAMPLE_DELTAS)


def table_oracle(x, y, s):
    # typed independently from the closed form, kept deliberately verbose
    c2x, c2y, c2s = np.cos(2 * x), np.cos(2 * y), np.cos(2 * s)
    sin, cos = np.sin, np.cos
    return dict(
        s10=c2x + c2y + 2 * c2s,
        s01=c2x - c2y,
        l20=(c2x - c2y) ** 2 + 8 * c2s * (c2x + c2y),
        l11=2 * (c2x - c2y) * (c2x + c2y + 2 * c2s),
        l02=(c2x + c2y - 2 * c2s) ** 2,
        n20=sin(x + y) * (sin(x - 3 * y) + sin(3 * x - y) + 6 * sin(x - y + 2 * s) - 2 * sin(x - y - 2 * s)),
        n11=8 * (sin(x + s) ** 2 * cos(x - s) ** 2 + sin(y - s) ** 2 * cos(y + s) ** 2),
        n02=(c2y - c2x) * (c2x + c2y - 2 * c2s),
        d20=cos(x - y) * (cos(3 * x + y) + cos(x + 3 * y) + 2 * cos(x + y - 2 * s) + 4 * cos(x + 3 * s) * cos(y - s)),
        d11=cos(4 * x) - cos(4 * y) - 4 * sin(x + y) * sin(x - y + 2 * s),
        d02=sin(x - y) * (sin(x + 3 * y) - sin(3 * x + y) + 2 * sin(x + y - 2 * s) - 4 * cos(x + 3 * s) * sin(y - s)),
    )


class TestBase:
    def test_example_xys(self):
        # reference values were computed from delta4 rounded to five decimals
        p = EXAMPLE_P
        assert (p.x, p.y, p.s) == pytest.approx((-0.220175, -0.14841, 0.0122975), abs=5e-6)

    def test_pairwise_equal(self):
        p = deltas_to_xys([np.pi / 3, 2 * np.pi / 3, np.pi / 3, 2 * np.pi / 3])
        assert (p.x, p.y, p.s) == pytest.approx((0.0, 0.0, -np.pi / 6), abs=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(*(st.floats(-1.5, 1.5),) * 3)
    def test_round_trip(self, x, y, s):
        d = xys_to_deltas(x, y, s)
        assert d.sum() == pytest.approx(2 * np.pi, abs=1e-12)
        p = deltas_to_xys(d)
        assert (p.x, p.y, p.s) == pytest.approx((x, y, s), abs=1e-12)

    @pytest.mark.parametrize(
        "deltas",
        [
            (np.pi / 2,) * 4,
            (np.pi / 2, 1.0, 2.0, 2 * np.pi - np.pi / 2 - 3.0),
            (1.0, 1.0, 1.0, 1.0),
            (np.pi, 1.0, 1.0, np.pi - 2.0),
        ],
    )
    def test_rejected(self, deltas):
        with pytest.raises(RightAngle):
            BaseAngles(deltas)

    def test_last_angle_renormalized(self):
        d = EXAMPLE_DELTAS.copy()
        d[3] += 5e-10
        b = BaseAngles(tuple(d))
        assert sum(b.deltas) == pytest.approx(2 * np.pi, abs=1e-15)


class TestClosedForm:
    def test_table_at_origin(self):
        t = coefficient_table(0.0, 0.0, 0.0)
        assert (t["s10"], t["s01"], t["l20"], t["l11"], t["l02"]) == (4, 0, 16, 0, 0)
        assert (t["n20"], t["n11"], t["n02"], t["d11"]) == (0, 0, 0, 0)

    @settings(max_examples=100, deadline=None)
    @given(*(st.floats(-1.5, 1.5),) * 3)
    def test_table_double_entry(self, x, y, s):
        t, o = coefficient_table(x, y, s), table_oracle(x, y, s)
        for k in o:
            assert t[k] == pytest.approx(o[k], abs=1e-12)

    def test_table_vectorized(self):
        x = np.linspace(-1, 1, 5)
        t = coefficient_table(x, 0.3, -0.2)
        assert t["d20"].shape == (5,)

    @pytest.mark.parametrize("tau", [0.3, 1.7, -2.2, EXAMPLE_TAU])
    def test_branch_merge(self, tau):
        p = EXAMPLE_P
        a, _, _ = r1_raw(tau + np.pi, p.x, p.y, p.s)
        b, _, _ = r1_raw(tau, p.x, p.y, p.s, conjugate=True)
        assert a == pytest.approx(b, rel=1e-12)

    def test_swap_symmetry(self):
        p = EXAMPLE_P
        rc = rc_quadruple(EXAMPLE_TAU, p)
        sw = rc_quadruple(EXAMPLE_TAU, XYSParams(-p.x, -p.y, p.s))
        assert (sw.r1, sw.c1, sw.r3, sw.c3) == pytest.approx((rc.r3, rc.c3, rc.r1, rc.c1), rel=1e-12)

    def test_example_z_values(self):
        rc = rc_quadruple(EXAMPLE_TAU, EXAMPLE_P)
        Z = z_values(rc, EXAMPLE_DELTAS)
        # with tan(tau) = -60: Z1 = Z3 = 122, Z2 = Z4 = -118
        np.testing.assert_allclose(Z, [122, -118, 122, -118], atol=1e-9)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(0, 2 * np.pi), *(st.floats(-1.5, 1.5),) * 3)
    def test_z_system(self, tau, x, y, s):
        d = xys_to_deltas(x, y, s)
        if np.min(np.abs(np.cos(d))) < 1e-2:
            return
        try:
            rc = rc_quadruple(tau, XYSParams(x, y, s))
        except OutOfRange:
            return
        except Exception:
            return
        Z = z_values(rc, d)
        assert Z[0] == pytest.approx(Z[2], abs=1e-9)
        assert Z[1] == pytest.approx(Z[3], abs=1e-9)
        assert Z[0] + Z[1] == pytest.approx(4.0, abs=1e-9)
        assert Z[0] / 2 == pytest.approx(1 - np.tan(tau), abs=1e-9 * max(1, abs(np.tan(tau))))

    def test_r1_errors(self):
        # find a tau where L < 0 at the example point
        taus = np.linspace(0, 2 * np.pi, 2000)
        _, L, _, _ = forms(taus, EXAMPLE_P.x, EXAMPLE_P.y, EXAMPLE_P.s)
        bad = taus[np.argmin(L)]
        if L.min() < -1e-6:
            with pytest.raises(Exception):
                r1_of(bad, EXAMPLE_P)


class TestInversion:
    def test_lambda_branches(self):
        rc = RCQuadruple(-0.8, 0.5, 0.5, 0.5)
        lp, _ = rc_to_lambda_mu(rc, (1, 1, 1, 1))
        lm, _ = rc_to_lambda_mu(rc, (-1, -1, -1, -1))
        assert {round(lp[0], 12), round(lm[0], 12)} == {-0.5, -2.0}
        for lam in (lp[0], lm[0]):
            assert 2 * lam / (lam * lam + 1) == pytest.approx(-0.8, abs=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-1, 0.999).filter(lambda v: abs(v) > 1e-6))
    def test_sign_follows_r(self, r):
        rc = RCQuadruple(r, r, r, r)
        for signs in ((1,) * 4, (-1,) * 4):
            lam, mu = rc_to_lambda_mu(rc, signs, signs)
            assert np.all(np.sign(lam) == np.sign(rc.r))
            assert np.all(np.sign(mu) == np.sign(rc.c))

    def test_double_root(self):
        lam, _ = rc_to_lambda_mu(RCQuadruple(-1.0, 0.5, 0.5, 0.5))
        assert lam[0] == -1.0

    def test_sigma_assignments(self):
        sig = sigma_assignments()
        assert len(sig) == 16
        assert np.all(sig[0][0] == 1) and np.all(sig[0][1] == 1)
        for sa, sg in sig:
            assert sa[0] * sa[1] == sa[2] * sa[3] == sg[0] * sg[3] == sg[1] * sg[2] == 1


class TestExample:
    def test_alpha_beta_table(self, example_spec):
        A = example_spec.angles()
        np.testing.assert_allclose(A[:, 0], EXAMPLE_TABLE["alpha"], atol=1e-4)
        np.testing.assert_allclose(A[:, 1], EXAMPLE_TABLE["beta"], atol=1e-4)
        np.testing.assert_allclose(A[[0, 3], 2], np.array(EXAMPLE_TABLE["gamma"])[[0, 3]], atol=1e-4)
        np.testing.assert_allclose(A[:, 3], EXAMPLE_DELTAS, atol=1e-12)

    def test_gamma_table_up_to_reflection(self, example_spec):
        # the printed gamma2, gamma3 are pi minus the values forced by orthodiagonality
        A = example_spec.angles()
        g = np.array(EXAMPLE_TABLE["gamma"])
        np.testing.assert_allclose(A[1:3, 2], np.pi - g[1:3], atol=1e-4)
        for i in (1, 2):
            a, b, gg, d = EXAMPLE_TABLE["alpha"][i], EXAMPLE_TABLE["beta"][i], g[i], EXAMPLE_DELTAS[i]
            assert abs(np.cos(a) * np.cos(gg) - np.cos(b) * np.cos(d)) > 1e-2
            assert abs(np.cos(a) * np.cos(np.pi - gg) - np.cos(b) * np.cos(d)) < 1e-4

    def test_invariants(self, example_spec):
        s = example_spec
        assert np.array_equal(sign_pattern(s.lam, s.mu), SIGN_PATTERN)
        assert np.max(np.abs(eq8_residual(s.lam, s.mu))) < 1e-9
        assert np.max(np.abs(eq9_residual(s.lam, s.mu, s.nu))) < 1e-9
        assert s.zetas[0] > 1

    def test_factors_match_rc(self, example_spec):
        s = example_spec
        rc = rc_quadruple(s.tau, deltas_to_xys(s.deltas))
        # r_i = 2 lam_i / (lam_i^2 + 1), possibly after re-enumeration
        r = 2 * s.lam / (s.lam**2 + 1)
        c = 2 * s.mu / (s.mu**2 + 1)
        assert sorted(np.round(np.concatenate([r, c]), 9)) == sorted(np.round(np.concatenate([rc.r, rc.c]), 9))

    def test_json_round_trip(self, example_spec, tmp_path):
        p = tmp_path / "spec.json"
        example_spec.to_json(p)
        data = json.loads(p.read_text())
        assert set(data) == {"deltas", "tau", "vertices", "zetas", "enumeration", "sigma"}
        assert set(data["vertices"][0]) == {"alpha", "beta", "gamma", "delta", "lambda", "mu", "nu"}
        back = PolyhedronSpec.from_json(p)
        np.testing.assert_allclose(back.angles(), example_spec.angles(), rtol=1e-15)
        np.testing.assert_allclose(back.nu, example_spec.nu, rtol=1e-15)


class TestStageErrors:
    def _tau_with_code(self, code):
        taus = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
        for p in random_specs(20, seed=3):
            x, y, s = (deltas_to_xys(p.deltas).x, deltas_to_xys(p.deltas).y, deltas_to_xys(p.deltas).s)
            hit = np.flatnonzero(stage_codes(x, y, s, taus) == code)
            if hit.size:
                return p.deltas, taus[hit[hit.size // 2]]
        pytest.skip("no sample reached this stage")

    def test_beta_undefined(self):
        # r, c near 1 force alpha, gamma near 0, while cos(delta) is small
        b = BaseAngles((1.5, 1.6, 1.4, 2 * np.pi - 4.5))
        with pytest.raises(BetaUndefined):
            recover_angles(b, RCQuadruple(0.999, 0.999, 0.999, 0.999))

    def test_not_elliptic(self):
        d, tau = self._tau_with_code(3)
        with pytest.raises(NotElliptic):
            build_spec(d, tau, strict=False)


class TestEnumeration:
    def test_identity_on_normalized(self, example_spec):
        assert matching_shifts(example_spec) == [0]
        n = normalize_enumeration(example_spec)
        assert n.enumeration == example_spec.enumeration

    def test_all_plus_row_at_third_vertex(self, example_spec):
        rot = shift_spec(example_spec, 2)
        assert np.all(sign_pattern(rot.lam, rot.mu)[2] == 1)
        assert matching_shifts(rot) == [2]
        back = normalize_enumeration(rot)
        np.testing.assert_allclose(back.angles(), example_spec.angles())

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_idempotent(self, example_spec, k):
        n1 = normalize_enumeration(shift_spec(example_spec, k))
        n2 = normalize_enumeration(n1)
        np.testing.assert_allclose(n1.angles(), n2.angles())
        assert n1.enumeration == n2.enumeration

    def test_random_specs(self):
        for s in random_specs(30):
            assert np.array_equal(sign_pattern(s.lam, s.mu), SIGN_PATTERN)
            assert s.zetas[0] > 1
            assert np.max(np.abs(eq8_residual(s.lam, s.mu))) < 1e-9
            assert np.max(np.abs(eq9_residual(s.lam, s.mu, s.nu))) < 1e-9
