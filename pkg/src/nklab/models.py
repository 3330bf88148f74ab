"""Concrete chart models: S3 x S3, the round 6-sphere, and S2 x S2.

S3 x S3 uses exponential charts on each factor.  Tangent vectors are
left-trivialized through the differential of the quaternion exponential,
which has the closed form

    T(x) w = A(s) w - V(s) x cross w + U(s) <x, w> x,     s = |x|^2,

with A = sinc(2 sqrt s), V = (1 - cos(2 sqrt s))/(2 s) and U = (1 -
A)/s -- all entire in s, so the chart is smooth through x = 0.  The
structure J(U,V) = (2V - U, V - 2U)/sqrt3 and the quadratic form
|U|^2 + |V|^2 - <U,V> are expressed on coordinates by conjugating with the
block transport matrix.

The 6-sphere sits in the imaginary octonions; J_p = p cross (.) is pulled
back through stereographic charts.  S2 x S2 with radius 1/(2 sqrt 3) per
factor is the Einstein base (Ric = 12 g) used by the reduction suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jets as J
from .chart import ChartMap, ConfigError, EvalContext
from .exterior import wedge

__all__ = [
    "ModelBundle",
    "build_s3s3",
    "build_s3s3_product",
    "build_s6",
    "build_s2s2",
    "build_model",
    "build_killing_field",
    "build_flat_kahler",
    "MODEL_BUILDERS",
    "calibrate_scale",
    "S3S3_SCALE",
    "S2S2_RADIUS",
    "qmul_v",
    "qconj_v",
    "qexp_v",
    "qlog_v",
    "octonion_cross_table",
    "transition_s3s3",
    "eval_value",
]

# Metric scale for which S3 x S3 has constant type 1 (scal = 30): the type
# constant at scale 1 measures 4/9 and scales inversely with the metric, so
# c = 4/9.  The value is re-derived at test time by calibrate_scale().
S3S3_SCALE = 4.0 / 9.0

S2S2_RADIUS = 1.0 / (2.0 * math.sqrt(3.0))


# ---------------------------------------------------------------------------
# quaternion helpers (value level)

_QT = np.zeros((4, 4, 4))
_QT[0, 0, 0] = 1
for _i in range(1, 4):
    _QT[0, _i, _i] = -1
    _QT[_i, 0, _i] = 1
    _QT[_i, _i, 0] = 1
for _i, _j, _k in [(1, 2, 3), (2, 3, 1), (3, 1, 2)]:
    _QT[_k, _i, _j] = 1
    _QT[_k, _j, _i] = -1

_EPS3 = np.zeros((3, 3, 3))
for _i, _j, _k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
    _EPS3[_i, _j, _k] = 1
    _EPS3[_i, _k, _j] = -1


def qmul_v(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("ijk,...j,...k->...i", _QT, a, b)


def qconj_v(q: np.ndarray) -> np.ndarray:
    out = np.array(q, dtype=float, copy=True)
    out[..., 1:] *= -1
    return out


def qexp_v(v: np.ndarray) -> np.ndarray:
    """Exponential of a pure-imaginary quaternion given as a 3-vector."""
    v = np.atleast_2d(v)
    th = np.linalg.norm(v, axis=-1, keepdims=True)
    sinc = np.where(th > 1e-12, np.sin(th) / np.where(th > 0, th, 1.0), 1.0)
    return np.concatenate([np.cos(th), sinc * v], axis=-1)


def qlog_v(q: np.ndarray) -> np.ndarray:
    """Inverse of qexp_v for unit quaternions with positive real part branch."""
    q = np.atleast_2d(q)
    w = np.clip(q[..., :1], -1.0, 1.0)
    v = q[..., 1:]
    nv = np.linalg.norm(v, axis=-1, keepdims=True)
    th = np.arctan2(nv, w)
    fac = np.where(nv > 1e-12, th / np.where(nv > 0, nv, 1.0), 1.0)
    return fac * v


# ---------------------------------------------------------------------------
# quaternion helpers (jet level)


def _jslice(x: J.Jet, sl) -> J.Jet:
    return J.Jet(x.space, x.c[sl], x.ok)


def _jqmul(a: J.Jet, b: J.Jet) -> J.Jet:
    outer = J.jj("j,k->jk", a, b)
    return J.jc("ijk,jk->i", _QT, outer)


def _qexp_jet(x: J.Jet) -> J.Jet:
    """exp of a pure-imaginary (3,)-jet -> (4,)-jet, entire in |x|^2."""
    s = J.jj("a,a->", x, x)
    c = J.jentire(s, J.COS_SQRT)
    sc = J.jentire(s, J.SINC_SQRT)
    vec = J.jj(",a->a", sc, x)
    return J.Jet(x.space, np.concatenate([c.c[None], vec.c], axis=0), min(c.ok, vec.ok))


def _transport_jet(x: J.Jet) -> J.Jet:
    """T(x): coordinate basis -> left-trivialized Lie algebra, (3,3)-jet."""
    s = J.jj("a,a->", x, x)
    four_s = 4.0 * s
    a = J.jentire(four_s, J.SINC_SQRT)       # sinc(2 sqrt s)
    v = J.jentire(s, J.VERSINE_RATIO)        # (1 - cos 2 sqrt s) / (2 s)
    u = J.jentire(s, J.SINC_DEFECT)          # (1 - a) / s
    nb = x.nbatch
    eye = J.jconst(x.space, np.broadcast_to(np.eye(3), (nb, 3, 3)).copy())
    cross = J.jc("abc,b->ac", _EPS3, x)      # (x cross .)[a, c]
    outer = J.jj("a,d->ad", x, x)
    t = J.jj(",ad->ad", a, eye) - J.jj(",ad->ad", v, cross) + J.jj(",ad->ad", u, outer)
    return t


# ---------------------------------------------------------------------------
# model bundle


@dataclass
class ModelBundle:
    """A registered geometry: charts plus roles of its field evaluators."""

    name: str
    kind: str                       # 'nk6' or 'base4'
    charts: list
    killing: dict = field(default_factory=dict)   # candidate -> evaluator name
    default_killing: str | None = None
    meta: dict = field(default_factory=dict)

    @property
    def chart(self) -> ChartMap:
        return self.charts[0]


def eval_value(chart: ChartMap, name: str, points: np.ndarray) -> np.ndarray:
    ctx = EvalContext(chart, points, order=0)
    return ctx.root(name).val


def _fix_orientation_nk6(chart: ChartMap) -> None:
    """Orient the chart so the coordinate volume matches Omega^3 / 6."""
    p = chart.center()[None, :]
    ctx = EvalContext(chart, p, order=0)
    g = ctx.root("metric").val
    jm = ctx.root("J").val
    om = np.einsum("bki,bkj->bij", jm, g)
    om3 = wedge(wedge(om, 2, om, 2), 4, om, 2)
    comp = om3[0, 0, 1, 2, 3, 4, 5] / 6.0
    ref = math.sqrt(float(np.linalg.det(g[0])))
    chart.orientation = 1.0 if comp / ref > 0 else -1.0


# ---------------------------------------------------------------------------
# S3 x S3

_J_ALG = np.kron(np.array([[-1.0, 2.0], [-2.0, 1.0]]) / math.sqrt(3.0), np.eye(3))
_J_SWAP = np.kron(np.array([[0.0, -1.0], [1.0, 0.0]]), np.eye(3))


def _s3s3_frames(ctx: EvalContext):
    def build(c):
        x = _jslice(c.coords, slice(0, 3))
        y = _jslice(c.coords, slice(3, 6))
        tx = _transport_jet(x)
        ty = _transport_jet(y)
        nb = c.nbatch
        m = J.Jet(c.space, np.zeros((6, 6, c.space.ncoef, nb)), min(tx.ok, ty.ok))
        m.c[:3, :3] = tx.c
        m.c[3:, 3:] = ty.c
        minv = J.Jet(c.space, np.zeros_like(m.c), m.ok)
        minv.c[:3, :3] = J.jmatinv(tx).c
        minv.c[3:, 3:] = J.jmatinv(ty).c
        return m, minv

    return ctx.memo("s3s3_frames", build)


def _s3s3_metric_evaluator(c_scale: float, cross: bool = True):
    def ev(ctx):
        m, _ = _s3s3_frames(ctx)
        tx = _jslice(m, (slice(0, 3), slice(0, 3)))
        ty = _jslice(m, (slice(3, 6), slice(3, 6)))
        gxx = J.jj("ai,aj->ij", tx, tx)
        gyy = J.jj("ai,aj->ij", ty, ty)
        g = J.Jet(ctx.space, np.zeros((6, 6, ctx.space.ncoef, ctx.nbatch)), min(gxx.ok, gyy.ok))
        g.c[:3, :3] = gxx.c
        g.c[3:, 3:] = gyy.c
        if cross:
            gxy = J.jj("ai,aj->ij", tx, ty)
            g.c[:3, 3:] = -0.5 * gxy.c
            g.c[3:, :3] = -0.5 * np.swapaxes(gxy.c, 0, 1)
        return c_scale * g

    return ev


def _s3s3_J_evaluator(jalg: np.ndarray):
    def ev(ctx):
        m, minv = _s3s3_frames(ctx)
        jm = J.jc("AB,Bj->Aj", jalg, m)
        return J.jj("AB,Bj->Aj", minv, jm)

    return ev


def _s3s3_xi_diag_evaluator(c_scale: float, axis=(0.0, 0.0, 1.0)):
    a = np.array(axis) / np.linalg.norm(axis) / math.sqrt(c_scale)
    v6 = np.concatenate([a, a])

    def ev(ctx):
        _, minv = _s3s3_frames(ctx)
        return J.jc("B,AB->A", v6, minv)

    return ev


def _s3s3_xi_left_evaluator(c_scale: float, p0: np.ndarray, axis=(1.0, 0.0, 0.0)):
    b = np.array(axis) / np.linalg.norm(axis) / math.sqrt(c_scale)
    bq = np.concatenate([[0.0], b])
    bp = qmul_v(qmul_v(qconj_v(p0), bq), p0)  # Ad_{p0^{-1}} b

    def ev(ctx):
        x = _jslice(ctx.coords, slice(0, 3))
        e = _qexp_jet(x)
        bj = J.jconst(ctx.space, np.broadcast_to(bp, (ctx.nbatch, 4)).copy())
        w = _jqmul(_jqmul(J.Jet(e.space, qconj_jet_c(e), e.ok), bj), e)
        _, minv = _s3s3_frames(ctx)
        nb = ctx.nbatch
        v = J.Jet(ctx.space, np.zeros((6, ctx.space.ncoef, nb)), w.ok)
        v.c[:3] = w.c[1:]
        return J.jj("AB,B->A", minv, v)

    return ev


def qconj_jet_c(q: J.Jet) -> np.ndarray:
    c = q.c.copy()
    c[1:] *= -1
    return c


_S3S3_CENTERS = {
    "a": (np.array([1.0, 0.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0, 0.0])),
    "b": (qexp_v(np.array([0.4, 0.0, 0.0]))[0], qexp_v(np.array([0.0, 0.3, 0.1]))[0]),
}


def build_s3s3(scale: float | None = None, charts=("a", "b")) -> ModelBundle:
    """Nearly Kahler S3 x S3; ``scale`` defaults to the calibrated value."""
    c_scale = S3S3_SCALE if scale is None else float(scale)
    box = [(-0.8, 0.8)] * 6
    chart_list = []
    for key in charts:
        p0, q0 = _S3S3_CENTERS[key]
        ev = {
            "metric": _s3s3_metric_evaluator(c_scale),
            "J": _s3s3_J_evaluator(_J_ALG),
            "xi:diag": _s3s3_xi_diag_evaluator(c_scale),
            "xi:left": _s3s3_xi_left_evaluator(c_scale, p0),
        }
        ch = ChartMap(f"s3s3:{key}", box, ev, meta={"centers": (p0, q0), "scale": c_scale})
        _fix_orientation_nk6(ch)
        chart_list.append(ch)
    return ModelBundle(
        name="s3s3",
        kind="nk6",
        charts=chart_list,
        killing={"diag": "xi:diag", "left": "xi:left"},
        default_killing="diag",
        meta={"scale": c_scale},
    )


def build_s3s3_product() -> ModelBundle:
    """Product metric with the factor-swap almost complex structure.

    This is *not* nearly Kahler; it exists as the negative control.
    """
    box = [(-0.8, 0.8)] * 6
    p0, q0 = _S3S3_CENTERS["a"]
    ev = {
        "metric": _s3s3_metric_evaluator(1.0, cross=False),
        "J": _s3s3_J_evaluator(_J_SWAP),
    }
    ch = ChartMap("s3s3-product:a", box, ev, meta={"centers": (p0, q0)})
    _fix_orientation_nk6(ch)
    return ModelBundle(name="s3s3-product", kind="nk6", charts=[ch])


def transition_s3s3(bundle: ModelBundle, i_from: int, i_to: int, coords: np.ndarray) -> np.ndarray:
    """Express chart-i coordinates in chart-j coordinates (value level)."""
    pa, qa = bundle.charts[i_from].meta["centers"]
    pb, qb = bundle.charts[i_to].meta["centers"]
    coords = np.atleast_2d(coords)
    x, y = coords[:, :3], coords[:, 3:]
    p = qmul_v(pa, qexp_v(x))
    q = qmul_v(qa, qexp_v(y))
    x2 = qlog_v(qmul_v(qconj_v(pb), p))
    y2 = qlog_v(qmul_v(qconj_v(qb), q))
    return np.concatenate([x2, y2], axis=-1)


def calibrate_scale(samples: int = 12, seed: int = 0) -> float:
    """Metric scale on S3 x S3 giving constant type 1.

    Measures the type constant at scale 1 and applies the homothety law
    alpha(c) = alpha(1)/c.
    """
    from .nkcore import constant_type_samples
    from .chart import sample_points

    bundle = build_s3s3(scale=1.0, charts=("a",))
    rng = np.random.default_rng(seed)
    pts = sample_points(bundle.chart, samples, rng)
    alphas = constant_type_samples(bundle.chart, pts, rng, pairs_per_point=4)
    return float(np.mean(alphas))


# ---------------------------------------------------------------------------
# round S6 in the imaginary octonions


def octonion_cross_table() -> np.ndarray:
    """(7,7,7) tensor C with (x cross y)_k = C[k,i,j] x_i y_j."""
    c = np.zeros((7, 7, 7))
    triples = [(1, 2, 4), (2, 3, 5), (3, 4, 6), (4, 5, 7), (5, 6, 1), (6, 7, 2), (7, 1, 3)]
    for i, j, k in triples:
        for a, b, cc in [(i, j, k), (j, k, i), (k, i, j)]:
            c[cc - 1, a - 1, b - 1] = 1
            c[cc - 1, b - 1, a - 1] = -1
    return c


_OCT = octonion_cross_table()


def _s6_embed(ctx: EvalContext, pole: float):
    """Stereographic embedding Phi and its differential P (closed forms)."""

    def build(c):
        u = c.coords
        s = J.jj("a,a->", u, u)
        w = J.jrecip(1.0 + s)
        nb = c.nbatch
        phi = J.Jet(c.space, np.zeros((7, c.space.ncoef, nb)), min(u.ok, w.ok))
        phi.c[:6] = J.jj(",a->a", 2.0 * w, u).c
        phi.c[6] = (pole * (s - 1.0) * w).c
        w2 = J.jj(",->", w, w)
        eye = J.jconst(c.space, np.broadcast_to(np.eye(6), (nb, 6, 6)).copy())
        outer = J.jj("a,i->ai", u, u)
        p = J.Jet(c.space, np.zeros((6, 7, c.space.ncoef, nb)), min(u.ok, w2.ok))
        # d_i Phi_a = 2 w delta_ai - 4 w^2 u_a u_i ; d_i Phi_7 = pole * 4 w^2 u_i
        pa = J.jj(",ia->ia", 2.0 * w, eye) - J.jj(",ai->ia", 4.0 * w2, outer)
        p.c[:, :6] = pa.c
        p.c[:, 6] = J.jj(",i->i", 4.0 * pole * w2, u).c
        return phi, p

    return ctx.memo(("s6_embed", pole), build)


def _s6_metric_evaluator(pole: float):
    def ev(ctx):
        _, p = _s6_embed(ctx, pole)
        return J.jj("iA,jA->ij", p, p)

    return ev


def _s6_J_evaluator(pole: float):
    def ev(ctx):
        phi, p = _s6_embed(ctx, pole)
        gi = J.jmatinv(J.jj("iA,jA->ij", p, p))
        amb = J.jj("B,jC->BjC", phi, p)
        cross = J.jc("ABC,BjC->Aj", _OCT, amb)   # (Phi x P_j)_A
        proj = J.jj("kA,Aj->kj", p, cross)
        return J.jj("ik,kj->ij", gi, proj)

    return ev


def _s6_rotation_evaluator(pole: float, amat: np.ndarray):
    def ev(ctx):
        phi, p = _s6_embed(ctx, pole)
        gi = J.jmatinv(J.jj("iA,jA->ij", p, p))
        w = J.jc("AB,B->A", amat, phi)
        down = J.jj("kA,A->k", p, w)
        return J.jj("ik,k->i", gi, down)

    return ev


def so7_generator(i: int, j: int) -> np.ndarray:
    a = np.zeros((7, 7))
    a[i, j] = 1.0
    a[j, i] = -1.0
    return a


def build_s6() -> ModelBundle:
    """Round unit 6-sphere with the octonion cross-product structure."""
    box = [(-0.7, 0.7)] * 6
    rot_specs = {
        "rot01": so7_generator(0, 1),
        "rot23": so7_generator(2, 3),
        "rot-mixed": so7_generator(0, 4) + 0.5 * so7_generator(1, 6),
    }
    charts = []
    for key, pole in (("north", 1.0), ("south", -1.0)):
        ev = {"metric": _s6_metric_evaluator(pole), "J": _s6_J_evaluator(pole)}
        for rname, amat in rot_specs.items():
            ev[f"xi:{rname}"] = _s6_rotation_evaluator(pole, amat)
        ch = ChartMap(f"s6:{key}", box, ev, meta={"pole": pole})
        _fix_orientation_nk6(ch)
        charts.append(ch)
    return ModelBundle(
        name="s6",
        kind="nk6",
        charts=charts,
        killing={k: f"xi:{k}" for k in rot_specs},
        default_killing="rot01",
        meta={},
    )


# ---------------------------------------------------------------------------
# S2 x S2 base


def _s2s2_metric_evaluator(r1: float, r2: float):
    def ev(ctx):
        sin1 = J.jsin(ctx.coord(0))
        sin2 = J.jsin(ctx.coord(2))
        nb = ctx.nbatch
        g = J.Jet(ctx.space, np.zeros((4, 4, ctx.space.ncoef, nb)), min(sin1.ok, sin2.ok))
        one = J.jconst(ctx.space, np.ones((nb,)))
        g.c[0, 0] = (r1 * r1 * one).c
        g.c[1, 1] = (r1 * r1 * J.jj(",->", sin1, sin1)).c
        g.c[2, 2] = (r2 * r2 * one).c
        g.c[3, 3] = (r2 * r2 * J.jj(",->", sin2, sin2)).c
        return g

    return ev


def _s2s2_rot_evaluator(signs=(1.0, 1.0)):
    """Block rotation: j(d_phi) = d_psi / sin(phi), j(d_psi) = -sin(phi) d_phi."""

    def ev(ctx):
        nb = ctx.nbatch
        out = J.Jet(ctx.space, np.zeros((4, 4, ctx.space.ncoef, nb)), ctx.space.order)
        for f, sgn in enumerate(signs):
            sin = J.jsin(ctx.coord(2 * f))
            inv = J.jrecip(sin)
            out.c[2 * f, 2 * f + 1] = (-sgn * sin).c
            out.c[2 * f + 1, 2 * f] = (sgn * inv).c
            out.ok = min(out.ok, sin.ok)
        return out

    return ev


def build_s2s2(radii: tuple[float, float] | None = None) -> ModelBundle:
    """Product of two round 2-spheres (default: Einstein with Ric = 12 g)."""
    r1, r2 = radii if radii is not None else (S2S2_RADIUS, S2S2_RADIUS)
    box = [(0.5, math.pi - 0.5), (-2.5, 2.5)] * 2
    ev = {
        "metric": _s2s2_metric_evaluator(r1, r2),
        "I0": _s2s2_rot_evaluator((1.0, 1.0)),
        "Jhat": _s2s2_rot_evaluator((1.0, -1.0)),
    }
    ch = ChartMap("s2s2:main", box, ev, orientation=1.0, meta={"radii": (r1, r2)})
    return ModelBundle(name="s2s2", kind="base4", charts=[ch], meta={"radii": (r1, r2)})


def build_killing_field(bundle: ModelBundle, direction=(0.0, 0.0, 1.0), family: str = "diag") -> str:
    """Register an extra Killing-candidate evaluator on every chart of an
    S3 x S3 bundle and return its name.

    ``family`` selects the diagonal right-translation generator or the
    left-translation generator on the first factor.  The field is scaled
    so that it has unit length when the model metric is the calibrated
    one (|xi|^2 = scale * |a|^2 for the diagonal family).
    """
    if bundle.name != "s3s3":
        raise ConfigError("build_killing_field only applies to the s3s3 model")
    a = np.asarray(direction, dtype=float)
    if np.linalg.norm(a) < 1e-12:
        raise ConfigError("direction must be nonzero")
    c_scale = bundle.meta["scale"]
    name = f"xi:{family}:{','.join(f'{v:g}' for v in a)}"
    for ch in bundle.charts:
        if family == "diag":
            ch.evaluators[name] = _s3s3_xi_diag_evaluator(c_scale, tuple(a))
        elif family == "left":
            ch.evaluators[name] = _s3s3_xi_left_evaluator(c_scale, ch.meta["centers"][0], tuple(a))
        else:
            raise ConfigError(f"unknown Killing family '{family}'")
    bundle.killing[name] = name
    return name


def build_flat_kahler() -> ModelBundle:
    """Flat C^3: constant metric and constant compatible J (for trivial
    controls -- nabla J = 0 so every NK residual vanishes identically)."""
    jmat = np.kron(np.eye(3), np.array([[0.0, -1.0], [1.0, 0.0]]))

    def ev_g(ctx):
        return J.jconst(ctx.space, np.broadcast_to(np.eye(6), (ctx.nbatch, 6, 6)).copy())

    def ev_j(ctx):
        return J.jconst(ctx.space, np.broadcast_to(jmat, (ctx.nbatch, 6, 6)).copy())

    ch = ChartMap("flat:c3", [(-1.0, 1.0)] * 6, {"metric": ev_g, "J": ev_j}, orientation=1.0)
    return ModelBundle(name="flat", kind="nk6", charts=[ch])


MODEL_BUILDERS = {
    "s3s3": build_s3s3,
    "s6": build_s6,
    "s2s2": build_s2s2,
    "s3s3-product": build_s3s3_product,
}


def build_model(name: str) -> ModelBundle:
    if name == "ansatz":
        from .ansatz import build_ansatz

        return build_ansatz()
    if name not in MODEL_BUILDERS:
        raise ConfigError(f"unknown model '{name}' (known: {sorted(MODEL_BUILDERS) + ['ansatz']})")
    return MODEL_BUILDERS[name]()
