import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from conftest import random_specs
from oaiflex.elliptic import (
    EllipticModulus,
    agm,
    align_parameterizations,
    ellip_K,
    flexion_elliptic,
    modulus_from_zeta,
    quarter_shift_eval,
    shifted_sn,
    sn_cn_dn,
    wrap_pi,
    write_comparison_csv,
)
from oaiflex.errors import PoleEncountered
from oaiflex.flexion import ALL_BRANCHES, Branch, flexion_elementary, reduce, residual_main

modulus = st.floats(1e-9, 0.999)


def sn_complex(u, v, k):
    """sn(u + i v, k) from real functions, the classical addition formula."""
    kp = np.sqrt(1 - k * k)
    s, c, d = special.ellipj(u, k * k)[:3]
    s1, c1, d1 = special.ellipj(v, kp * kp)[:3]
    den = c1**2 + k * k * s * s * s1**2
    return (s * d1 + 1j * c * d * s1 * c1) / den


class TestFunctions:
    def test_gauss_constant(self):
        assert 1 / agm(1.0, np.sqrt(2.0)) == pytest.approx(0.8346268416740731, rel=1e-15)

    @pytest.mark.parametrize("k", [1e-6, 0.0083345, 0.3, 0.7, 0.99, 0.999999])
    def test_K(self, k):
        # complementary parameter formed without cancellation
        assert ellip_K(k) == pytest.approx(special.ellipkm1((1 - k) * (1 + k)), rel=1e-13)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-20, 20), modulus)
    def test_sn_cn_dn(self, u, k):
        ref = special.ellipj(u, k * k)[:3]
        np.testing.assert_allclose(sn_cn_dn(u, k), ref, atol=1e-12)

    @pytest.mark.parametrize("k", [0.0, 1e-9, 5e-8])
    def test_small_modulus(self, k):
        u = np.linspace(-5, 5, 101)
        np.testing.assert_allclose(sn_cn_dn(u, k), special.ellipj(u, k * k)[:3], atol=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(modulus)
    def test_pythagoras(self, k):
        s, c, d = sn_cn_dn(np.linspace(0, 10, 50), k)
        np.testing.assert_allclose(s**2 + c**2, 1, atol=1e-13)
        np.testing.assert_allclose(d**2 + k * k * s**2, 1, atol=1e-13)


class TestModulus:
    def test_example_modulus(self, example_spec):
        mod = modulus_from_zeta(example_spec.zetas[0])
        assert mod.k == pytest.approx(0.0083, abs=2e-4)
        assert mod.k == pytest.approx(1 / (example_spec.zetas[0] + example_spec.zetas[1]) ** 2, rel=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1.0001, 1e4))
    def test_no_cancellation(self, z):
        k = modulus_from_zeta(z).k
        assert 0 < k < 1
        assert k * (z + np.sqrt(z * z - 1)) ** 2 == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize("k", [0.0, 1.0, -0.1])
    def test_bad_modulus(self, k):
        with pytest.raises(ValueError):
            EllipticModulus.from_k(k)

    def test_bad_zeta(self):
        with pytest.raises(ValueError):
            modulus_from_zeta(0.5)


class TestShifts:
    @pytest.mark.parametrize("n", [0, 1, 2, 3])
    @pytest.mark.parametrize("m", [0, 1])
    @pytest.mark.parametrize("k", [0.0083345, 0.4])
    def test_against_addition_formula(self, n, m, k):
        mod = EllipticModulus.from_k(k)
        t = np.linspace(-1.0, 1.0, 21)
        got = shifted_sn(n, m, t, mod)
        ref = sn_complex(n * mod.K, m * mod.K_prime / 2 + t, k)
        np.testing.assert_allclose(got, ref, rtol=1e-11, atol=1e-12)

    def test_pole(self):
        mod = EllipticModulus.from_k(0.3)
        num, den, imag = quarter_shift_eval(0, 2, 0.0, mod)
        assert imag and abs(den) < 1e-15
        with pytest.raises(PoleEncountered):
            shifted_sn(0, 2, 0.0, mod, tol=1e-14)

    @pytest.mark.parametrize("n, m", [(4, 0), (0, 3), (-1, 0)])
    def test_bad_shift(self, n, m):
        with pytest.raises(ValueError):
            quarter_shift_eval(n, m, 0.0, EllipticModulus.from_k(0.3))


class TestFlexion:
    @pytest.mark.parametrize("b", ALL_BRANCHES, ids=lambda b: b.label())
    def test_example_residual(self, example_spec, b):
        rc = reduce(example_spec)
        mod = modulus_from_zeta(rc.zeta1)
        t = np.linspace(0, 2 * mod.K_prime, 720, endpoint=False)
        assert np.max(np.abs(residual_main(rc, flexion_elliptic(rc, b, t, mod)))) < 1e-8

    def test_random_residual(self):
        for spec in random_specs(10):
            rc = reduce(spec)
            t = np.linspace(0, 2 * modulus_from_zeta(rc.zeta1).K_prime, 200)
            for b in ALL_BRANCHES:
                assert np.max(np.abs(residual_main(rc, flexion_elliptic(rc, b, t)))) < 1e-8

    def test_same_first_pair_on_both_curves(self, example_spec):
        # elliptic points lie on the elementary curve: (f1, g1) values coincide as sets
        rc = reduce(example_spec)
        mod = modulus_from_zeta(rc.zeta1)
        te = np.linspace(0, 2 * np.pi, 4000, endpoint=False)
        el = flexion_elementary(rc, Branch(), te).values[:2]
        ee = flexion_elliptic(rc, Branch(), np.linspace(0, 2 * mod.K_prime, 50), mod).values[:2]
        for j in range(ee.shape[1]):
            d = np.min(np.abs(np.log(el[0] / ee[0, j])) + np.abs(np.log(el[1] / ee[1, j])))
            assert d < 5e-3

    def test_alignment_shift_range(self, example_spec):
        rc = reduce(example_spec)
        mod = modulus_from_zeta(rc.zeta1)
        shift, diff = align_parameterizations(rc, Branch(), n=90, mod=mod)
        assert 0 <= shift < 2 * mod.K_prime
        assert 0 <= diff < np.pi


def test_wrap_pi():
    a = np.array([-np.pi - 0.1, 0.0, 3 * np.pi])
    w = wrap_pi(a)
    assert np.all((w >= -np.pi) & (w < np.pi))
    np.testing.assert_allclose(np.cos(w), np.cos(a), atol=1e-15)


def test_comparison_csv():
    buf = io.StringIO()
    write_comparison_csv(buf, [0.0, 1.0], [0.1, 6.2], [0.2, 0.0])
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,angle_elementary,angle_elliptic,diff"
    assert float(lines[2].split(",")[3]) == pytest.approx(6.2 - 2 * np.pi)
