"""Exterior algebra and Hodge operators against textbook identities."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nklab import exterior as E
from nklab import jets as J
from nklab.chart import ChartMap, EvalContext


def _alt_batch(a, p):
    # alt() expects the batch axis last in its trailing slots; easiest is
    # to antisymmetrise with the batch axis first via transpose tricks.
    out = np.zeros_like(a)
    from itertools import permutations
    import math as _m
    idx = list(range(1, p + 1))
    for perm in permutations(idx):
        sign = E.perm_sign([q - 1 for q in perm])
        out += sign * np.transpose(a, (0,) + tuple(perm))
    return out / _m.factorial(p)


class TestWedgeAlgebra:
    @given(seed=st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=20, deadline=None)
    def test_graded_commutativity_1_2(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(3, 5))
        b = _alt_batch(rng.normal(size=(3, 5, 5)), 2)
        ab = E.wedge(a, 1, b, 2)
        ba = E.wedge(b, 2, a, 1)
        assert np.allclose(ab, ba)  # (-1)^{1*2} = +1

    def test_one_forms_anticommute(self, rng):
        a = rng.normal(size=(2, 4))
        b = rng.normal(size=(2, 4))
        assert np.allclose(E.wedge(a, 1, b, 1), -E.wedge(b, 1, a, 1))

    def test_associativity(self, rng):
        a = rng.normal(size=(2, 6))
        b = rng.normal(size=(2, 6))
        c = rng.normal(size=(2, 6))
        lhs = E.wedge(E.wedge(a, 1, b, 1), 2, c, 1)
        rhs = E.wedge(a, 1, E.wedge(b, 1, c, 1), 2)
        assert np.allclose(lhs, rhs)

    def test_interior_antiderivation(self, rng):
        # i_X(a ^ b) = (i_X a) ^ b - a ^ (i_X b) for 1-forms a, b
        x = rng.normal(size=(3, 5))
        a = rng.normal(size=(3, 5))
        b = rng.normal(size=(3, 5))
        ab = E.wedge(a, 1, b, 1)
        lhs = E.interior(x, ab)
        ia = np.einsum("zi,zi->z", x, a)
        ib = np.einsum("zi,zi->z", x, b)
        rhs = ia[:, None] * b - ib[:, None] * a
        assert np.allclose(lhs, rhs)


class TestHodge:
    @pytest.mark.parametrize("p", [0, 1, 2, 3])
    def test_double_star_euclidean(self, rng, p):
        d = 4
        g = np.broadcast_to(np.eye(d), (2, d, d)).copy()
        gi = g.copy()
        a = _alt_batch(rng.normal(size=(2,) + (d,) * p), p) if p else rng.normal(size=(2,))
        ss = E.hodge(E.hodge(a, p, g, gi), d - p, g, gi)
        sign = (-1.0) ** (p * (d - p))
        assert np.allclose(ss, sign * a, atol=1e-12)

    def test_norm_via_star(self, rng):
        # a ^ *a = |a|^2 vol for a 1-form on flat R^3
        d = 3
        g = np.broadcast_to(np.eye(d), (2, d, d)).copy()
        a = rng.normal(size=(2, d))
        top = E.wedge(a, 1, E.hodge(a, 1, g, g), 2)
        vol = E.hodge(np.ones(2), 0, g, g)
        n2 = E.form_norm2(a, 1, g)
        assert np.allclose(top, n2[:, None, None, None] * vol, atol=1e-12)

    def test_orientation_flips_sign(self, rng):
        d = 3
        g = np.broadcast_to(np.eye(d), (1, d, d)).copy()
        a = rng.normal(size=(1, d))
        plus = E.hodge(a, 1, g, g, orientation=1.0)
        minus = E.hodge(a, 1, g, g, orientation=-1.0)
        assert np.allclose(plus, -minus)


def _scalar_field_chart():
    def metric(ctx):
        return J.jconst(ctx.space, np.broadcast_to(np.eye(3), (ctx.nbatch, 3, 3)).copy())

    return ChartMap("flat3", [(-1.0, 1.0)] * 3, {"metric": metric})


class TestDifferential:
    def test_d_squared_zero(self):
        ch = _scalar_field_chart()
        ctx = EvalContext(ch, np.array([[0.2, -0.1, 0.4]]), order=3)
        x, y, z = (ctx.coord(i) for i in range(3))
        f = J.jsin(x * y) + z * z * x
        df = E.d_form(ctx, f, 0)
        ddf = E.d_form(ctx, df, 1)
        assert np.max(np.abs(ddf.val)) < 1e-13

    def test_gradient_components(self):
        ch = _scalar_field_chart()
        p = np.array([[0.3, 0.5, -0.2]])
        ctx = EvalContext(ch, p, order=1)
        x, y, z = (ctx.coord(i) for i in range(3))
        f = x * y * z
        df = E.d_form(ctx, f, 0).val
        want = np.array([p[0, 1] * p[0, 2], p[0, 0] * p[0, 2], p[0, 0] * p[0, 1]])
        assert np.allclose(df[0], want)

    def test_codifferential_flat_divergence(self):
        # delta a = -div a on flat space
        ch = _scalar_field_chart()
        p = np.array([[0.1, 0.2, 0.3]])
        ctx = EvalContext(ch, p, order=2)
        x, y, z = (ctx.coord(i) for i in range(3))
        a = J.Jet(ctx.space, np.zeros((3, ctx.space.ncoef, 1)), ctx.space.order)
        a.c[0] = (x * x).c
        a.c[1] = (y * z).c
        a.c[2] = (x * z).c
        a.ok = 2
        div = 2 * p[0, 0] + p[0, 2] + p[0, 0]
        got = E.codifferential(ctx, a, 1).val
        assert np.allclose(got, -div, atol=1e-12)

    def test_wedge_jet_matches_value_wedge(self):
        ch = _scalar_field_chart()
        ctx = EvalContext(ch, np.array([[0.4, -0.3, 0.1]]), order=1)
        x, y, _ = (ctx.coord(i) for i in range(3))
        a = E.d_form(ctx, x * y, 0)
        b = E.d_form(ctx, y, 0)
        jet = E.wedge_jet(a, 1, b, 1).val
        val = E.wedge(a.val, 1, b.val, 1)
        assert np.allclose(jet, val)


class TestTypeSplit:
    def test_split_reconstructs_and_projects(self, rng):
        d = 4
        jm = np.kron(np.eye(2), np.array([[0.0, -1.0], [1.0, 0.0]]))
        jm = np.broadcast_to(jm, (3, d, d)).copy()
        a = _alt_batch(rng.normal(size=(3, d, d)), 2)
        sp = E.split_form_types(a, jm)
        assert np.allclose(sp.invariant + sp.anti, a, atol=1e-12)
        # invariant part commutes with J in form sense: b(JX, JY) = b(X, Y)
        binv = np.einsum("zai,zab,zbj->zij", jm, sp.invariant, jm)
        assert np.allclose(binv, sp.invariant, atol=1e-12)
        banti = np.einsum("zai,zab,zbj->zij", jm, sp.anti, jm)
        assert np.allclose(banti, -sp.anti, atol=1e-12)
