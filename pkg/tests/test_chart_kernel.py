"""Chart plumbing and the covariant-derivative kernel.

The flat torus and a synthetic conformally flat metric give closed-form
Christoffel symbols and curvature, so the kernel is checked against
hand-derived values rather than against itself.
"""
import math

import numpy as np
import pytest

from nklab import calculus as C
from nklab import jets as J
from nklab.chart import (
    ChartMap,
    ConfigError,
    DegenerateMetricError,
    EvalContext,
    OutOfDomainError,
    TensorValue,
    sample_points,
    unit_tangent_vectors,
)


def _flat_chart(dim=3):
    def metric(ctx):
        return J.jconst(ctx.space, np.broadcast_to(np.eye(dim), (ctx.nbatch, dim, dim)).copy())

    return ChartMap("flat", [(-1.0, 1.0)] * dim, {"metric": metric})


def _conformal_chart():
    """g = e^{2x} delta on R^2: Gamma^0_00 = 1, Gamma^0_11 = -1, Gamma^1_01 = 1."""

    def metric(ctx):
        f = J.jexp(2.0 * ctx.coord(0))
        out = J.Jet(ctx.space, np.zeros((2, 2, ctx.space.ncoef, ctx.nbatch)), ctx.space.order)
        out.c[0, 0] = f.c
        out.c[1, 1] = f.c
        out.ok = f.ok
        return out

    return ChartMap("conf", [(-1.0, 1.0)] * 2, {"metric": metric})


class TestChartValidation:
    def test_missing_metric_rejected(self):
        with pytest.raises(ConfigError):
            ChartMap("bad", [(-1, 1)], {})

    def test_degenerate_metric_rejected(self):
        def metric(ctx):
            return J.jconst(ctx.space, np.zeros((ctx.nbatch, 2, 2)))

        with pytest.raises(DegenerateMetricError):
            ChartMap("bad", [(-1, 1)] * 2, {"metric": metric})

    def test_asymmetric_metric_rejected(self):
        def metric(ctx):
            m = np.broadcast_to(np.array([[1.0, 0.3], [0.2, 1.0]]), (ctx.nbatch, 2, 2)).copy()
            return J.jconst(ctx.space, m)

        with pytest.raises(DegenerateMetricError):
            ChartMap("bad", [(-1, 1)] * 2, {"metric": metric})

    def test_out_of_domain(self):
        ch = _flat_chart()
        with pytest.raises(OutOfDomainError):
            EvalContext(ch, np.array([[0.0, 0.0, 2.0]]), order=0)

    def test_unknown_evaluator(self):
        ch = _flat_chart()
        ctx = EvalContext(ch, np.zeros((1, 3)), order=0)
        with pytest.raises(ConfigError):
            ctx.root("nope")

    def test_sample_points_respect_box(self):
        ch = _flat_chart()
        pts = sample_points(ch, 64, np.random.default_rng(0))
        assert np.all(ch.contains(pts))


class TestKernel:
    def test_flat_christoffel_vanishes(self):
        ch = _flat_chart()
        ctx = EvalContext(ch, np.array([[0.1, -0.2, 0.5]]), order=2)
        assert np.max(np.abs(C.christoffel(ctx).val)) == 0.0
        assert np.max(np.abs(C.riemann(ctx).val)) == 0.0

    def test_conformal_christoffel_closed_form(self):
        ch = _conformal_chart()
        ctx = EvalContext(ch, np.array([[0.3, 0.1], [-0.5, 0.7]]), order=2)
        gam = C.christoffel(ctx).val
        want = np.zeros_like(gam)
        want[:, 0, 0, 0] = 1.0
        want[:, 0, 1, 1] = -1.0
        want[:, 1, 0, 1] = want[:, 1, 1, 0] = 1.0
        assert np.allclose(gam, want, atol=1e-12)

    def test_conformal_scalar_curvature(self):
        # R = -2 e^{-2f} Lap f for g = e^{2f} delta in two dimensions.
        # f = x is harmonic, so this metric is secretly flat (u = e^x
        # turns it into polar coordinates du^2 + u^2 dy^2).
        ch = _conformal_chart()
        pts = np.array([[0.25, -0.4]])
        ctx = EvalContext(ch, pts, order=3)
        assert np.allclose(C.scalar_curvature(ctx).val, 0.0, atol=1e-11)

    def test_sphere_scalar_curvature(self):
        # round 2-sphere of radius r: R = 2 / r^2
        r = 0.7

        def metric(ctx):
            s = J.jsin(ctx.coord(0))
            out = J.Jet(ctx.space, np.zeros((2, 2, ctx.space.ncoef, ctx.nbatch)),
                        ctx.space.order)
            out.c[0, 0] = J.jconst(ctx.space, np.full(ctx.nbatch, r * r)).c
            out.c[1, 1] = (r * r * s * s).c
            out.ok = s.ok
            return out

        ch = ChartMap("sphere", [(0.4, math.pi - 0.4), (-2.0, 2.0)], {"metric": metric})
        ctx = EvalContext(ch, np.array([[1.1, 0.3], [0.8, -1.0]]), order=3)
        assert np.allclose(C.scalar_curvature(ctx).val, 2.0 / r**2, atol=1e-11)

    def test_covd_metric_vanishes(self):
        ch = _conformal_chart()
        ctx = EvalContext(ch, np.array([[0.2, 0.6]]), order=2)
        nab, kinds = C.covd(ctx, C.metric(ctx), "ll")
        assert kinds == "lll"
        assert np.max(np.abs(nab.val)) < 1e-13

    def test_fd_mode_matches_exact(self):
        ch = _conformal_chart()
        pts = np.array([[0.15, -0.3]])
        exact = C.christoffel(EvalContext(ch, pts, 2)).val
        approx = C.christoffel(EvalContext(ch, pts, 2, mode="fd")).val
        assert np.allclose(exact, approx, atol=1e-8)

    def test_memo_caches(self):
        ch = _flat_chart()
        ctx = EvalContext(ch, np.zeros((1, 3)), order=1)
        calls = []

        def build(c):
            calls.append(1)
            return 42

        assert ctx.memo("k", build) == 42
        assert ctx.memo("k", build) == 42
        assert len(calls) == 1


class TestTensorValue:
    def test_musical_roundtrip(self, rng):
        g = np.eye(3) * 2.0
        gi = np.linalg.inv(g)
        comps = rng.normal(size=(4, 3, 3))
        tv = TensorValue(comps, "ll")
        up = tv.raise_(0, g[None], gi[None])
        assert up.kinds == "ul"
        back = up.lower(0, g[None], gi[None])
        assert np.allclose(back.components, comps)
        assert tv.valence == (0, 2)

    def test_unit_tangent_vectors(self, rng):
        g = np.broadcast_to(np.diag([1.0, 4.0, 9.0]), (5, 3, 3)).copy()
        v = unit_tangent_vectors(g, rng, n_per_point=2)
        norms = np.einsum("zni,zij,znj->zn", v, g, v)
        assert np.allclose(norms, 1.0, atol=1e-12)
