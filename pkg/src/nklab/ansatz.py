"""Explicit six-dimensional model: a two-torus bundle over S2 x S2.

The chart coordinates are (phi1, psi1, phi2, psi2, t1, t2): spherical
angles on the two base factors followed by the two fiber angles.  Over
the product of two round 2-spheres of radius 1/(2 sqrt 3) we pick

* a connection form ``theta = dt1 + A`` whose curvature is -12 times
  the Kahler form of the base complex structure,
* a connection form ``mu = dt2 + B`` whose curvature is twice the
  fundamental form of the commuting anti-selfdual rotation, and
* a complex 2-form ``Phi`` of type (0,2) with a fiber phase, normalised
  so the reconstructed structure matches the homogeneous S3 x S3 one.

The metric and 2-form assembled from these data,

    g     = mu (x) mu + (1/12) theta (x) theta + (4/3) g_base
            - 1/(2 sqrt 3) (Re Phi)(Jhat . , .)
    omega = 1/(2 sqrt 3) mu ^ theta + 1/2 Im Phi,

define an almost Hermitian structure whose integrability residuals are
certified numerically at assembly time.  The ``printed_coefficients``
flag swaps in the uncorrected vertical/horizontal weights
(theta (x) theta and (2/3) g_base); those make the symmetric tensor
degenerate, which the chart constructor rejects -- the flag exists so
tests can demonstrate the failure.

The phase of ``Phi`` carries an integer gauge (n1, n2).  The correct
gauge is the one making ``d Phi - i theta ^ Phi`` vanish; see
``gauge_search``, which recovers (-1, -1) by scanning a window of
candidates.  Shifting the gauge while adding the compensating exact
form to ``theta`` is a pure coordinate change in t1, checked by
``gauge_equivalence_residual``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jets as J
from . import calculus as C
from .chart import (
    ChartMap,
    EvalContext,
    ConfigError,
    InvariantViolation,
    sample_points,
)
from .exterior import d_form, wedge_jet
from .models import ModelBundle

__all__ = [
    "BASE_RADIUS",
    "TAUT_NORMALIZATION",
    "DEFAULT_GAUGE",
    "base_coframe",
    "base_metric_jet",
    "base_rotations",
    "connection_forms",
    "connection_residuals",
    "tautological_pair",
    "twisted_parallel_residual",
    "GaugeSearchResult",
    "gauge_search",
    "assemble",
    "build_ansatz",
    "certify_nk",
    "gauge_equivalence_residual",
]

#: Radius of each base sphere; makes the base Einstein with Ric = 12 g.
BASE_RADIUS = 1.0 / (2.0 * math.sqrt(3.0))

#: Scale of the tautological 2-form.  Pinned by matching the transversal
#: complex volume form of the reduced homogeneous model, whose squared
#: form norm is 64/3 = 2 * TAUT_NORMALIZATION**2.
TAUT_NORMALIZATION = 4.0 / math.sqrt(3.0)

#: Fiber-phase gauge for which the twisted parallel equation holds.
DEFAULT_GAUGE = (-1, -1)

_DIM = 6
_VERT_WEIGHT = 1.0 / 12.0       # theta (x) theta coefficient
_BASE_WEIGHT = 4.0 / 3.0        # pulled-back base metric coefficient
_CROSS_WEIGHT = 1.0 / (2.0 * math.sqrt(3.0))


def _scalar_const(ctx: EvalContext, value: float) -> J.Jet:
    return J.jconst(ctx.space, np.full(ctx.nbatch, float(value)))


def _one_form(ctx: EvalContext, comps: dict) -> J.Jet:
    """Covector jet with the given scalar-jet components (others zero)."""
    out = J.Jet(ctx.space, np.zeros((_DIM, ctx.space.ncoef, ctx.nbatch)),
                ctx.space.order)
    for i, s in comps.items():
        out.c[i] = s.c
        out.ok = min(out.ok, s.ok)
    return out


# ---------------------------------------------------------------------------
# base geometry, pulled back to the 6-dimensional chart


def base_coframe(ctx: EvalContext):
    """Orthonormal coframe (a1, a2, b1, b2) of the two sphere factors."""

    def build(c):
        r = BASE_RADIUS
        s1 = J.jsin(c.coord(0))
        s2 = J.jsin(c.coord(2))
        a1 = _one_form(c, {0: _scalar_const(c, r)})
        a2 = _one_form(c, {1: r * s1})
        b1 = _one_form(c, {2: _scalar_const(c, r)})
        b2 = _one_form(c, {3: r * s2})
        return a1, a2, b1, b2

    return ctx.memo(("ansatz", "coframe"), build)


def base_metric_jet(ctx: EvalContext) -> J.Jet:
    """Pullback of the base metric: a 6 x 6 jet supported on axes 0-3."""

    def build(c):
        frame = base_coframe(c)
        out = J.jj("i,j->ij", frame[0], frame[0])
        for e in frame[1:]:
            out = out + J.jj("i,j->ij", e, e)
        return out

    return ctx.memo(("ansatz", "g0"), build)


def base_rotations(ctx: EvalContext):
    """Endomorphism jets (I0, Jhat): both rotate each factor by 90 degrees,
    with equal orientations for I0 and opposite ones for Jhat."""

    def build(c):
        endos = []
        for s2_sign in (1.0, -1.0):
            out = J.Jet(c.space, np.zeros((_DIM, _DIM, c.space.ncoef, c.nbatch)),
                        c.space.order)
            for f, sgn in ((0, 1.0), (1, s2_sign)):
                sin = J.jsin(c.coord(2 * f))
                inv = J.jrecip(sin)
                out.c[2 * f, 2 * f + 1] = (-sgn * sin).c
                out.c[2 * f + 1, 2 * f] = (sgn * inv).c
                out.ok = min(out.ok, inv.ok)
            endos.append(out)
        return tuple(endos)

    return ctx.memo(("ansatz", "rotations"), build)


def _area_forms(ctx: EvalContext):
    """(omega_1, omega_2): the area forms of the two factors."""

    def build(c):
        a1, a2, b1, b2 = base_coframe(c)
        return wedge_jet(a1, 1, a2, 1), wedge_jet(b1, 1, b2, 1)

    return ctx.memo(("ansatz", "areas"), build)


# ---------------------------------------------------------------------------
# connection forms on the torus fibers


def connection_forms(ctx: EvalContext, shift=(0, 0)):
    """(theta, mu): the two fiber connection forms.

    ``shift = (p1, p2)`` adds the exact form p1 dpsi1 + p2 dpsi2 to the
    first connection; gauge-equivalent models compensate it in the phase
    of the tautological form.
    """
    p1, p2 = shift

    def build(c):
        one = _scalar_const(c, 1.0)
        c1 = J.jcos(c.coord(0))
        c2 = J.jcos(c.coord(2))
        theta = _one_form(c, {
            1: (c1 - one) + _scalar_const(c, float(p1)),
            3: (c2 - one) + _scalar_const(c, float(p2)),
            4: one,
        })
        mu = _one_form(c, {
            1: (one - c1) * (1.0 / 6.0),
            3: (c2 - one) * (1.0 / 6.0),
            5: one,
        })
        return theta, mu

    return ctx.memo(("ansatz", "conn", (p1, p2)), build)


def connection_residuals(ctx: EvalContext, shift=(0, 0)) -> dict:
    """Curvature anchors: d theta = -12 omega_I0 and d mu = 2 omega_Jhat."""
    theta, mu = connection_forms(ctx, shift)
    w1, w2 = _area_forms(ctx)
    r1 = d_form(ctx, theta, 1) + 12.0 * (w1 + w2)
    r2 = d_form(ctx, mu, 1) - 2.0 * (w1 - w2)
    return {
        "dtheta_plus_12_omega_i0": float(np.max(np.abs(r1.val))),
        "dmu_minus_2_omega_jhat": float(np.max(np.abs(r2.val))),
    }


# ---------------------------------------------------------------------------
# the tautological (0,2)-form


def tautological_pair(ctx: EvalContext, gauge, conjugate: bool = False,
                      shift=(0, 0), scale: float = TAUT_NORMALIZATION):
    """(Re Phi, Im Phi) for Phi = scale * e^{i gamma} (a1 - i a2)^(b1 - i b2).

    ``gamma = t1 + n1 psi1 + n2 psi2`` with (n1, n2) = gauge + shift.
    ``conjugate`` replaces the factor 1-forms by their complex conjugates.
    """
    n1 = gauge[0] + shift[0]
    n2 = gauge[1] + shift[1]
    s = -1.0 if conjugate else 1.0

    def build(c):
        a1, a2, b1, b2 = base_coframe(c)
        p_re = wedge_jet(a1, 1, b1, 1) - wedge_jet(a2, 1, b2, 1)
        p_im = -s * (wedge_jet(a1, 1, b2, 1) + wedge_jet(a2, 1, b1, 1))
        gamma = c.coord(4) + float(n1) * c.coord(1) + float(n2) * c.coord(3)
        cg = J.jcos(gamma)
        sg = J.jsin(gamma)
        re = scale * (J.jj(",ij->ij", cg, p_re) - J.jj(",ij->ij", sg, p_im))
        im = scale * (J.jj(",ij->ij", sg, p_re) + J.jj(",ij->ij", cg, p_im))
        return re, im

    return ctx.memo(("ansatz", "taut", (n1, n2, s, scale)), build)


def twisted_parallel_residual(ctx: EvalContext, gauge, conjugate: bool = False,
                              shift=(0, 0)) -> float:
    """Max component of d Phi - i theta ^ Phi at the context's points."""
    re, im = tautological_pair(ctx, gauge, conjugate, shift)
    theta, _ = connection_forms(ctx, shift)
    res_re = d_form(ctx, re, 2) + wedge_jet(theta, 1, im, 2)
    res_im = d_form(ctx, im, 2) - wedge_jet(theta, 1, re, 2)
    return float(max(np.max(np.abs(res_re.val)), np.max(np.abs(res_im.val))))


@dataclass
class GaugeSearchResult:
    gauge: tuple
    conjugate: bool
    residual: float
    table: dict = field(repr=False)


def gauge_search(samples: int = 6, seed: int = 0, span: int = 2) -> GaugeSearchResult:
    """Scan integer gauges (and the conjugate option) for the one that
    makes the twisted parallel equation hold; smallest residual wins,
    with the non-conjugate representative preferred on ties."""
    chart = _build_chart(DEFAULT_GAUGE, False, (0, 0), False)
    pts = sample_points(chart, samples, np.random.default_rng(seed))
    ctx = EvalContext(chart, pts, order=1)
    table = {}
    best = None
    for n1 in range(-span, span + 1):
        for n2 in range(-span, span + 1):
            for conj in (False, True):
                val = twisted_parallel_residual(ctx, (n1, n2), conj)
                table[(n1, n2, conj)] = val
                key = (val, conj)
                if best is None or key < (table[best], best[2]):
                    best = (n1, n2, conj)
    return GaugeSearchResult(gauge=best[:2], conjugate=best[2],
                             residual=table[best], table=table)


# ---------------------------------------------------------------------------
# assembly


def _metric_evaluator(gauge, conjugate, shift, printed):
    vert = 1.0 if printed else _VERT_WEIGHT
    base = 2.0 / 3.0 if printed else _BASE_WEIGHT

    def ev(ctx):
        theta, mu = connection_forms(ctx, shift)
        re, _ = tautological_pair(ctx, gauge, conjugate, shift)
        _, jhat = base_rotations(ctx)
        g0 = base_metric_jet(ctx)
        cross = J.jj("ai,ab->ib", jhat, re)
        g = (J.jj("i,j->ij", mu, mu) + vert * J.jj("i,j->ij", theta, theta)
             + base * g0 - _CROSS_WEIGHT * cross)
        return 0.5 * (g + g.transpose(1, 0))

    return ev


def _j_evaluator(gauge, conjugate, shift):
    def ev(ctx):
        theta, mu = connection_forms(ctx, shift)
        _, im = tautological_pair(ctx, gauge, conjugate, shift)
        om = _CROSS_WEIGHT * wedge_jet(mu, 1, theta, 1) + 0.5 * im
        gi = J.jmatinv(ctx.root("metric"))
        return J.jj("aj,jm->ma", om, gi)

    return ev


def _fiber_evaluator():
    def ev(ctx):
        out = J.Jet(ctx.space, np.zeros((_DIM, ctx.space.ncoef, ctx.nbatch)),
                    ctx.space.order)
        out.c[5] = _scalar_const(ctx, 1.0).c
        return out

    return ev


def _build_chart(gauge, conjugate, shift, printed) -> ChartMap:
    box = [(0.5, math.pi - 0.5), (-2.5, 2.5)] * 2 + [(-3.0, 3.0)] * 2
    ev = {
        "metric": _metric_evaluator(gauge, conjugate, shift, printed),
        "J": _j_evaluator(gauge, conjugate, shift),
        "xi:fiber": _fiber_evaluator(),
    }
    return ChartMap("ansatz:main", box, ev, orientation=1.0,
                    meta={"gauge": tuple(gauge), "conjugate": conjugate,
                          "shift": tuple(shift)})


def _certify_chart(chart: ChartMap, samples: int, seed: int, tol: float) -> None:
    """Raise unless J is a g-compatible almost complex structure and the
    fiber field has unit length."""
    pts = sample_points(chart, samples, np.random.default_rng(seed))
    ctx = EvalContext(chart, pts, order=0)
    g = ctx.root("metric").val
    jm = ctx.root("J").val
    xi = ctx.root("xi:fiber").val
    sq = np.einsum("zab,zbc->zac", jm, jm) + np.eye(_DIM)
    if np.max(np.abs(sq)) > tol:
        raise InvariantViolation("acs_square", float(np.max(np.abs(sq))))
    compat = np.einsum("zai,zab,zbj->zij", jm, g, jm) - g
    if np.max(np.abs(compat)) > tol:
        raise InvariantViolation("acs_compatibility", float(np.max(np.abs(compat))))
    unit = np.abs(np.sqrt(np.einsum("zi,zij,zj->z", xi, g, xi)) - 1.0)
    if np.max(unit) > tol:
        raise InvariantViolation("fiber_unit_length", float(np.max(unit)))


def assemble(gauge=None, conjugate: bool = False, shift=(0, 0),
             printed_coefficients: bool = False, certify: bool = True,
             samples: int = 12, seed: int = 0, tol: float = 1e-6) -> ModelBundle:
    """Build the model bundle.

    With the default (corrected) weights the assembled structure passes
    the pointwise certification; ``printed_coefficients=True`` restores
    the uncorrected weights, whose symmetric tensor is degenerate and is
    rejected when the chart validates its metric.
    """
    g = tuple(DEFAULT_GAUGE if gauge is None else gauge)
    if len(g) != 2 or any(int(v) != v for v in g):
        raise ConfigError("gauge must be a pair of integers")
    ch = _build_chart(g, conjugate, tuple(shift), printed_coefficients)
    if certify:
        _certify_chart(ch, samples, seed, tol)
    from .models import _fix_orientation_nk6

    _fix_orientation_nk6(ch)
    return ModelBundle(
        name="ansatz",
        kind="nk6",
        charts=[ch],
        killing={"fiber": "xi:fiber"},
        default_killing="fiber",
        meta={"gauge": g, "conjugate": conjugate, "shift": tuple(shift)},
    )


def build_ansatz() -> ModelBundle:
    return assemble()


# ---------------------------------------------------------------------------
# certification against the structure equations


def certify_nk(bundle: ModelBundle = None, samples: int = 20, seed: int = 0) -> dict:
    """Residual battery for the assembled model.

    Covers the defining conditions (almost complex, metric-compatible,
    skew covariant derivative), the type constant, the Einstein anchors,
    the Killing property of the fiber field, the curvature anchors of the
    two connection forms, and the twisted parallel equation.
    """
    from . import nkcore as NK

    if bundle is None:
        bundle = assemble()
    chart = bundle.chart
    rng = np.random.default_rng(seed)
    struct = NK.NKStructure(chart)
    out = dict(NK.check_nearly_kahler(struct, samples=samples, seed=seed))

    pts = sample_points(chart, samples, rng)
    alpha = NK.constant_type_samples(chart, pts, rng)
    out["alpha_mean_err"] = float(abs(np.mean(alpha) - 1.0))
    out["alpha_spread"] = float(np.max(alpha) - np.min(alpha))

    ctx3 = EvalContext(chart, pts[: max(2, samples // 3)], order=3)
    out.update(NK.einstein_and_ricci_star_check(ctx3))

    from .reduction import Reduction, verify_killing_unit

    red = Reduction(bundle.killing[bundle.default_killing])
    ctx2 = EvalContext(chart, pts[: max(2, samples // 2)], order=2)
    for k, v in verify_killing_unit(ctx2, red).items():
        out[f"fiber_{k}"] = v

    ctx1 = EvalContext(chart, pts, order=1)
    out.update(connection_residuals(ctx1, bundle.meta.get("shift", (0, 0))))
    out["twisted_parallel"] = twisted_parallel_residual(
        ctx1, bundle.meta["gauge"], bundle.meta["conjugate"],
        bundle.meta.get("shift", (0, 0)))
    return out


def gauge_equivalence_residual(shift=(1, -1), samples: int = 10,
                               seed: int = 0) -> dict:
    """Shifting the connection gauge is a coordinate change in t1.

    The model with phase gauge (n1+p1, n2+p2) and connection shifted by
    p1 dpsi1 + p2 dpsi2 pulls back to the reference model under
    t1 -> t1 - p1 psi1 - p2 psi2.  Compare metric and J at mapped points.
    """
    p1, p2 = shift
    base = assemble(certify=False)
    shifted = assemble(shift=shift, certify=False)
    rng = np.random.default_rng(seed)
    pts = sample_points(base.chart, samples, rng)
    # restrict psi and t1 so both the point and its image stay in the box
    width = 2.4 / max(1.0, abs(p1) + abs(p2))
    pts[:, 1] = rng.uniform(-width, width, size=samples)
    pts[:, 3] = rng.uniform(-width, width, size=samples)
    pts[:, 4] = rng.uniform(-0.3, 0.3, size=samples)
    f = p1 * pts[:, 1] + p2 * pts[:, 3]
    mapped = pts.copy()
    mapped[:, 4] = pts[:, 4] - f
    # Jacobian of (.., t1, ..) -> (.., t1 - p1 psi1 - p2 psi2, ..)
    jac = np.eye(_DIM)
    jac[4, 1] = -p1
    jac[4, 3] = -p2
    jinv = np.eye(_DIM)
    jinv[4, 1] = p1
    jinv[4, 3] = p2
    ctx_a = EvalContext(base.chart, pts, order=0)
    ctx_b = EvalContext(shifted.chart, mapped, order=0)
    g_pull = np.einsum("ai,zab,bj->zij", jac, ctx_b.root("metric").val, jac)
    j_pull = np.einsum("ia,zab,bj->zij", jinv, ctx_b.root("J").val, jac)
    return {
        "metric": float(np.max(np.abs(ctx_a.root("metric").val - g_pull))),
        "J": float(np.max(np.abs(ctx_a.root("J").val - j_pull))),
    }
