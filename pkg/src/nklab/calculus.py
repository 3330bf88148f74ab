"""Connection-level machinery: Christoffel symbols, curvature, transport.

Sign conventions (pinned by the quantitative anchors in the test suite):

* R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_{[X,Y]} Z, with
  components R^l_{ijk} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik} + Gamma
  quadratic terms, so that the round unit sphere has positive sectional
  curvature.
* Ric(X,Y) = tr(Z -> R(Z,X)Y), i.e. Ric_{jk} = R^i_{ijk}; the round unit
  6-sphere then has Ric = 5 g and scalar curvature 30.
* The curvature operator on 2-forms is q(a)_{ij} = -1/2 a^{kl} R_{klij}
  (identity operator on round spheres).

All functions take an :class:`~nklab.chart.EvalContext` and return jets;
derived jets are memoized on the context.
"""

from __future__ import annotations

import numpy as np

from . import jets as J
from .chart import DegenerateFrameError, EvalContext, TensorValue, gram_schmidt

__all__ = [
    "metric",
    "metric_inv",
    "christoffel",
    "christoffel_of",
    "covd",
    "covd_field",
    "second_covd_field",
    "riemann",
    "riemann_lower",
    "ricci",
    "scalar_curvature",
    "curvature_operator_value",
    "lie_derivative",
    "orthonormal_frame_value",
    "christoffel_at",
    "covariant_derivative_at",
    "second_covariant_derivative_at",
    "riemann_at",
    "ricci_at",
    "scalar_curvature_at",
]


def metric(ctx: EvalContext) -> J.Jet:
    return ctx.root("metric")


def metric_inv(ctx: EvalContext) -> J.Jet:
    return ctx.memo("metric_inv", lambda c: J.jmatinv(metric(c)))


def _christoffel_from(g: J.Jet) -> J.Jet:
    ginv = J.jmatinv(g)
    dg = J.jgrad(g)  # (i, a, b) = d_i g_ab
    s = J.junary("ijl->lij", dg) + J.junary("jil->lij", dg) - J.junary("lij->lij", dg)
    return 0.5 * J.jj("kl,lij->kij", ginv, s)


def christoffel(ctx: EvalContext) -> J.Jet:
    """Gamma^k_{ij} of the chart metric; tensor shape (k, i, j)."""
    return ctx.memo("christoffel", lambda c: _christoffel_from(metric(c)))


def christoffel_of(ctx: EvalContext, metric_field, key: str) -> J.Jet:
    """Christoffel symbols of an alternative metric field (e.g. the Kahler
    quotient metric), memoized under ``key``."""
    return ctx.memo(("christoffel_of", key), lambda c: _christoffel_from(metric_field(c)))


def covd(ctx: EvalContext, t: J.Jet, kinds: str, gamma: J.Jet | None = None) -> tuple[J.Jet, str]:
    """Covariant derivative; the new covariant slot becomes tensor axis 0.

    (covd T)[i, ...] = nabla_i T[...]; pass ``gamma`` to differentiate with
    respect to a connection other than the chart Levi-Civita one.
    """
    if gamma is None:
        gamma = christoffel(ctx)
    out = J.jgrad(t)
    n = len(kinds)
    letters = [chr(ord("a") + q) for q in range(n)]
    base = "".join(letters)
    for q, kind in enumerate(kinds):
        src = letters[q]
        rest = base.replace(src, "m")
        if kind == "u":
            corr = J.jj(f"{src}im,{rest}->i{base}", gamma, t)
            out = out + corr
        else:
            corr = J.jj(f"mi{src},{rest}->i{base}", gamma, t)
            out = out - corr
    return out, "l" + kinds


def covd_field(ctx: EvalContext, field, kinds: str, key, gamma_key=None, gamma_field=None) -> tuple[J.Jet, str]:
    """Memoized covariant derivative of a field callable (ctx -> Jet)."""

    def build(c):
        gamma = None
        if gamma_field is not None:
            gamma = christoffel_of(c, gamma_field, gamma_key)
        return covd(c, field(c), kinds, gamma=gamma)[0]

    return ctx.memo(("covd", key, gamma_key), build), "l" + kinds


def second_covd_field(ctx: EvalContext, field, kinds: str, key) -> tuple[J.Jet, str]:
    """nabla^2_{i,j} of a field: covd applied twice; axes (i, j, ...)."""

    def build(c):
        first, k1 = covd(c, field(c), kinds)
        return covd(c, first, k1)[0]

    return ctx.memo(("covd2", key), build), "ll" + kinds


def riemann(ctx: EvalContext) -> J.Jet:
    """R^l_{ijk} with R(e_i,e_j)e_k = R^l_{ijk} e_l; tensor shape (l,i,j,k)."""

    def build(c):
        gam = christoffel(c)
        dgam = J.jgrad(gam)  # (i, l, j, k)
        t1 = J.junary("iljk->lijk", dgam)
        t2 = J.junary("jlik->lijk", dgam)
        q1 = J.jj("lim,mjk->lijk", gam, gam)
        q2 = J.jj("ljm,mik->lijk", gam, gam)
        return t1 - t2 + q1 - q2

    return ctx.memo("riemann", build)


def riemann_lower(ctx: EvalContext) -> J.Jet:
    """R_{ijkl} = g(R(e_i,e_j)e_k, e_l)."""

    def build(c):
        return J.jj("mijk,ml->ijkl", riemann(c), metric(c))

    return ctx.memo("riemann_lower", build)


def ricci(ctx: EvalContext) -> J.Jet:
    return ctx.memo("ricci", lambda c: J.junary("iijk->jk", riemann(c)))


def scalar_curvature(ctx: EvalContext) -> J.Jet:
    def build(c):
        return J.jj("jk,jk->", ricci(c), metric_inv(c))

    return ctx.memo("scalar_curvature", build)


def curvature_operator_value(ctx: EvalContext, alpha: np.ndarray) -> np.ndarray:
    """q(alpha)_{ij} = -1/2 alpha^{kl} R_{klij} at value level.

    ``alpha`` is (nbatch, d, d) covariant antisymmetric.
    """
    rl = riemann_lower(ctx).val
    gi = metric_inv(ctx).val
    up = np.einsum("bka,blc,bac->bkl", gi, gi, alpha)
    return -0.5 * np.einsum("bkl,bklij->bij", up, rl)


def lie_derivative(ctx: EvalContext, xfield: J.Jet, t: J.Jet, kinds: str) -> J.Jet:
    """Lie derivative along a vector-field jet, coordinate formula.

    (L_X T) = X^m d_m T + sum_lower (d_a X^m) T[..m..]
                        - sum_upper (d_m X^a) T[..m..].
    """
    dX = J.jgrad(xfield)  # (i, a) = d_i X^a
    dT = J.jgrad(t)
    n = len(kinds)
    letters = [chr(ord("a") + q) for q in range(n)]
    base = "".join(letters)
    out = J.jj(f"m,m{base}->{base}", xfield, dT)
    for q, kind in enumerate(kinds):
        src = letters[q]
        rest = base.replace(src, "m")
        if kind == "l":
            out = out + J.jj(f"{src}m,{rest}->{base}", dX, t)
        else:
            out = out - J.jj(f"m{src},{rest}->{base}", dX, t)
    return out


def orthonormal_frame_value(g: np.ndarray, seeds: np.ndarray | None = None, rng=None) -> np.ndarray:
    """g-orthonormal frame per batch point via Gram-Schmidt.

    Seeds default to the coordinate basis; permuting the seeds permutes
    the resulting frame correspondingly (the procedure is deterministic).
    """
    nb, d = g.shape[0], g.shape[-1]
    if seeds is None:
        seeds = np.broadcast_to(np.eye(d), (nb, d, d)).copy()
    if seeds.ndim == 2:
        seeds = np.broadcast_to(seeds, (nb,) + seeds.shape).copy()
    return gram_schmidt(seeds, g)


# ---------------------------------------------------------------------------
# pointwise wrappers


def _ctx_at(chart, p, order, mode="exact"):
    return EvalContext(chart, np.atleast_2d(p), order=order, mode=mode)


def christoffel_at(chart, p, mode: str = "exact"):
    """Christoffel symbols at a single point; returns TensorValue ('ull')."""
    ctx = _ctx_at(chart, p, order=1, mode=mode)
    return TensorValue(christoffel(ctx).val, "ull", ctx.points)


def covariant_derivative_at(chart, p, field, kinds: str, mode: str = "exact"):
    ctx = _ctx_at(chart, p, order=2, mode=mode)
    out, k = covd(ctx, field(ctx), kinds)
    return TensorValue(out.val, k, ctx.points)


def second_covariant_derivative_at(chart, p, field, kinds: str, mode: str = "exact"):
    ctx = _ctx_at(chart, p, order=3, mode=mode)
    out, k = second_covd_field(ctx, field, kinds, key=("at", id(field)))
    return TensorValue(out.val, k, ctx.points)


def riemann_at(chart, p, mode: str = "exact"):
    ctx = _ctx_at(chart, p, order=2, mode=mode)
    return TensorValue(riemann(ctx).val, "ulll", ctx.points)


def ricci_at(chart, p, mode: str = "exact"):
    ctx = _ctx_at(chart, p, order=2, mode=mode)
    return TensorValue(ricci(ctx).val, "ll", ctx.points)


def scalar_curvature_at(chart, p, mode: str = "exact"):
    ctx = _ctx_at(chart, p, order=2, mode=mode)
    return float(scalar_curvature(ctx).val[0])
