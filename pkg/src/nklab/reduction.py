"""Reduction of a nearly Kahler six-manifold by a unit Killing field.

Given a chart with ``metric`` and ``J`` evaluators and the name of a unit
Killing vector field evaluator, this module builds the induced objects --
the dual 1-forms, the vertical/horizontal splitting, the three transversal
anticommuting almost complex structures, the endomorphisms entering the
torsion of the splitting, the deformed metric whose horizontal part is
Kahler, and the canonical Hermitian connection -- and measures the
residuals of the identities they satisfy.

Conventions: endomorphism arrays are indexed ``E[a, i]`` for E^a_i (apply
on the left), 2-forms of an endomorphism are ``omega_E(X, Y) = g(E X, Y)``,
and all residual functions return ``{name: float}`` dictionaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import calculus as C
from . import jets as J
from .chart import EvalContext, NonEinsteinBaseError
from .exterior import (
    codifferential,
    d_form,
    form_ip,
    form_laplacian_field,
    form_norm2,
    wedge,
)
from .nkcore import d_omega, j_field, nabla_j, omega_field

__all__ = [
    "Reduction",
    "KillingData",
    "TransversalStructures",
    "ReducedKahlerData",
    "CanonicalConnection",
    "verify_killing_unit",
    "foliation_checks",
    "build_transversals",
    "acs_check",
    "transversal_parallel_check",
    "norms_and_laplacian_checks",
    "djxi_check",
    "lie_derivative_suite",
    "g0_connection_check",
    "build_reduced_kahler",
    "kahler_projection_check",
    "base_kahler_check",
    "sekigawa_terms_at",
    "canonical_connection_checks",
]

_SQ3 = math.sqrt(3.0)


def _maxabs(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


# ---------------------------------------------------------------------------
# field accessors


class Reduction:
    """Lazy, context-memoized fields induced by one Killing evaluator."""

    def __init__(self, killing_name: str = "xi:diag"):
        self.name = killing_name

    def _m(self, ctx: EvalContext, item: str, build):
        return ctx.memo(("red", self.name, item), build)

    # -- vertical data ----------------------------------------------------
    def xi(self, ctx) -> J.Jet:
        return ctx.root(self.name)

    def zeta(self, ctx) -> J.Jet:
        return self._m(ctx, "zeta", lambda c: J.jj("ij,j->i", C.metric(c), self.xi(c)))

    def jxi(self, ctx) -> J.Jet:
        return self._m(ctx, "jxi", lambda c: J.jj("ai,i->a", j_field(c), self.xi(c)))

    def jzeta(self, ctx) -> J.Jet:
        return self._m(ctx, "jzeta", lambda c: J.jj("ij,j->i", C.metric(c), self.jxi(c)))

    def dzeta(self, ctx) -> J.Jet:
        return self._m(ctx, "dzeta", lambda c: d_form(c, self.zeta(c), 1))

    def djzeta(self, ctx) -> J.Jet:
        return self._m(ctx, "djzeta", lambda c: d_form(c, self.jzeta(c), 1))

    def nabla_xi(self, ctx) -> J.Jet:
        """Endomorphism (nabla xi)[a, i] = nabla_i xi^a."""

        def build(c):
            cov = C.covd(c, self.xi(c), "u")[0]
            return J.junary("ia->ai", cov)

        return self._m(ctx, "nabla_xi", build)

    # -- transversal endomorphisms ---------------------------------------
    def i_endo(self, ctx) -> J.Jet:
        return self._m(ctx, "I", lambda c: J.jj("i,iaj->aj", self.xi(c), nabla_j(c)))

    def k_endo(self, ctx) -> J.Jet:
        return self._m(ctx, "K", lambda c: J.jj("i,iaj->aj", self.jxi(c), nabla_j(c)))

    def jhat(self, ctx) -> J.Jet:
        return self._m(ctx, "jhat",
                       lambda c: self.nabla_xi(c) + 0.5 * self.k_endo(c))

    def sigma(self, ctx) -> J.Jet:
        return self._m(ctx, "sigma",
                       lambda c: J.jj("ab,bi->ai", self.k_endo(c), self.jhat(c)))

    def pi_h(self, ctx) -> J.Jet:
        """Orthogonal projection onto the horizontal distribution."""

        def build(c):
            eye = J.jconst(c.space, np.broadcast_to(np.eye(c.chart.dim),
                                                    (c.nbatch,) + (c.chart.dim,) * 2).copy())
            t1 = J.jj("a,i->ai", self.xi(c), self.zeta(c))
            t2 = J.jj("a,i->ai", self.jxi(c), self.jzeta(c))
            return eye - t1 - t2

        return self._m(ctx, "pi_h", build)

    def omega_endo(self, ctx, endo_item: str) -> J.Jet:
        getter = {"I": self.i_endo, "K": self.k_endo, "jhat": self.jhat,
                  "sigma": self.sigma}[endo_item]
        return self._m(ctx, f"omega_{endo_item}",
                       lambda c: J.jj("ai,aj->ij", getter(c), C.metric(c)))

    # -- deformed metric ---------------------------------------------------
    def g0(self, ctx) -> J.Jet:
        def build(c):
            sflat = J.jj("ia,aj->ij", C.metric(c), self.sigma(c))
            return C.metric(c) + 0.5 * sflat

        return self._m(ctx, "g0", build)

    def g0_inv_val(self, ctx) -> np.ndarray:
        return np.linalg.inv(self.g0(ctx).val)

    def g0_christoffel(self, ctx) -> J.Jet:
        return C.christoffel_of(ctx, self.g0, key=("red", self.name, "g0"))

    # -- reduced Kahler structure -----------------------------------------
    def i0(self, ctx) -> J.Jet:
        """Normalized transversal structure (2/sqrt3)(1 - sigma/2) I."""

        def build(c):
            si = J.jj("ab,bi->ai", self.sigma(c), self.i_endo(c))
            return (2.0 / _SQ3) * (self.i_endo(c) - 0.5 * si)

        return self._m(ctx, "i0", build)

    def omega_j_form(self, ctx) -> J.Jet:
        """Horizontal part of the fundamental form: Omega - zeta ^ J zeta."""

        def build(c):
            prod = J.jj("i,j->ij", self.zeta(c), self.jzeta(c))
            wedge2 = prod - J.junary("ij->ji", prod)
            return omega_field(c) - wedge2

        return self._m(ctx, "omega_j", build)

    def omega_k_split(self, ctx):
        """I0-invariant and I0-anti-invariant parts of omega_K."""

        def build(c):
            om_k = self.omega_endo(c, "K")
            i0 = self.i0(c)
            half_moved = J.jj("ai,ab->ib", i0, om_k)
            moved = J.jj("bj,ib->ij", i0, half_moved)
            return ((om_k + moved) * 0.5, (om_k - moved) * 0.5)

        return self._m(ctx, "omega_k_split", build)

    def psi_form(self, ctx):
        """Complex 2-form sqrt3 * (anti-invariant part of omega_K) + 2i omega_J.

        Returns the pair (real jet, imaginary jet).
        """

        def build(c):
            _, anti = self.omega_k_split(c)
            return (_SQ3 * anti, 2.0 * self.omega_j_form(c))

        return self._m(ctx, "psi", build)

    def zeta_prime(self, ctx) -> J.Jet:
        return self._m(ctx, "zeta_prime", lambda c: (2.0 * _SQ3) * self.jzeta(c))

    def omega0_jhat(self, ctx) -> J.Jet:
        """g0-lowered form of jhat (equals dzeta/2)."""

        def build(c):
            return J.jj("ai,aj->ij", self.jhat(c), self.g0(c))

        return self._m(ctx, "omega0_jhat", build)

    # -- canonical Hermitian connection -----------------------------------
    def gamma_bar(self, ctx) -> J.Jet:
        """Christoffel symbols of nabla + (1/2) (nabla J) J."""

        def build(c):
            corr = 0.5 * J.jj("iam,mj->aij", nabla_j(c), j_field(c))
            return C.christoffel(c) + corr

        return self._m(ctx, "gamma_bar", build)


# ---------------------------------------------------------------------------
# value snapshots


@dataclass(frozen=True)
class KillingData:
    name: str
    xi: np.ndarray
    zeta: np.ndarray
    jxi: np.ndarray
    jzeta: np.ndarray
    dzeta: np.ndarray


@dataclass(frozen=True)
class TransversalStructures:
    i_endo: np.ndarray
    k_endo: np.ndarray
    jhat: np.ndarray
    sigma: np.ndarray
    pi_h: np.ndarray
    omega_i: np.ndarray
    omega_k: np.ndarray
    omega_jhat: np.ndarray
    g0: np.ndarray


@dataclass(frozen=True)
class ReducedKahlerData:
    i0: np.ndarray
    omega_j: np.ndarray
    psi: np.ndarray        # complex components
    zeta_prime: np.ndarray
    g0: np.ndarray


@dataclass(frozen=True)
class CanonicalConnection:
    gamma_bar: np.ndarray


def build_killing_data(ctx: EvalContext, red: Reduction) -> KillingData:
    return KillingData(red.name, red.xi(ctx).val, red.zeta(ctx).val,
                       red.jxi(ctx).val, red.jzeta(ctx).val, red.dzeta(ctx).val)


def build_transversals(ctx: EvalContext, red: Reduction) -> TransversalStructures:
    return TransversalStructures(
        red.i_endo(ctx).val, red.k_endo(ctx).val, red.jhat(ctx).val,
        red.sigma(ctx).val, red.pi_h(ctx).val,
        red.omega_endo(ctx, "I").val, red.omega_endo(ctx, "K").val,
        red.omega_endo(ctx, "jhat").val, red.g0(ctx).val)


def build_reduced_kahler(ctx: EvalContext, red: Reduction) -> ReducedKahlerData:
    re_p, im_p = red.psi_form(ctx)
    return ReducedKahlerData(red.i0(ctx).val, red.omega_j_form(ctx).val,
                             re_p.val + 1j * im_p.val, red.zeta_prime(ctx).val,
                             red.g0(ctx).val)


def build_canonical_connection(ctx: EvalContext, red: Reduction) -> CanonicalConnection:
    return CanonicalConnection(red.gamma_bar(ctx).val)


# ---------------------------------------------------------------------------
# Killing field and foliation


def verify_killing_unit(ctx: EvalContext, red: Reduction) -> dict:
    """Unit length and invariance of the metric and of J along the field."""
    g = C.metric(ctx)
    xi = red.xi(ctx)
    n2 = np.einsum("zi,zij,zj->z", xi.val, g.val, xi.val)
    out = {"unit_length": _maxabs(np.sqrt(n2) - 1.0)}
    out["killing"] = _maxabs(C.lie_derivative(ctx, xi, g, "ll").val)
    out["preserves_j"] = _maxabs(C.lie_derivative(ctx, xi, j_field(ctx), "ul").val)
    out["preserves_omega"] = _maxabs(C.lie_derivative(ctx, xi, omega_field(ctx), "ll").val)
    if ctx.order >= 2:
        out["preserves_d_omega"] = _maxabs(
            C.lie_derivative(ctx, xi, d_omega(ctx), "lll").val)
    return out


def foliation_checks(ctx: EvalContext, red: Reduction) -> dict:
    """The orbits of xi and J xi are totally geodesic and commute."""
    xi, jxi = red.xi(ctx), red.jxi(ctx)
    cov_xi = C.covd(ctx, xi, "u")[0].val       # (z, i, a)
    cov_jxi = C.covd(ctx, jxi, "u")[0].val
    xv, jv = xi.val, jxi.val
    out = {
        "acc_xi_xi": _maxabs(np.einsum("zi,zia->za", xv, cov_xi)),
        "acc_jxi_xi": _maxabs(np.einsum("zi,zia->za", jv, cov_xi)),
        "acc_xi_jxi": _maxabs(np.einsum("zi,zia->za", xv, cov_jxi)),
        "acc_jxi_jxi": _maxabs(np.einsum("zi,zia->za", jv, cov_jxi)),
        "commutator": _maxabs(C.lie_derivative(ctx, xi, jxi, "u").val),
    }
    dz = red.dzeta(ctx).val
    out["interior_xi_dzeta"] = _maxabs(np.einsum("zi,zij->zj", xv, dz))
    out["interior_jxi_dzeta"] = _maxabs(np.einsum("zi,zij->zj", jv, dz))
    return out


# ---------------------------------------------------------------------------
# transversal algebra


def acs_check(ctx: EvalContext, red: Reduction) -> dict:
    """Algebra of the three transversal structures and the split of dzeta."""
    g = C.metric(ctx).val
    jv = j_field(ctx).val
    i_e = red.i_endo(ctx).val
    k_e = red.k_endo(ctx).val
    jh = red.jhat(ctx).val
    sg = red.sigma(ctx).val
    pi = red.pi_h(ctx).val
    xi, jxi = red.xi(ctx).val, red.jxi(ctx).val

    def mm(a, b):
        return np.einsum("zab,zbi->zai", a, b)

    out = {}
    out["kills_vertical"] = max(
        _maxabs(np.einsum("zai,zi->za", e, v))
        for e in (i_e, k_e, jh, sg) for v in (xi, jxi))
    out["i_square"] = _maxabs(mm(i_e, i_e) + pi)
    out["k_square"] = _maxabs(mm(k_e, k_e) + pi)
    out["jhat_square"] = _maxabs(mm(jh, jh) + pi)
    out["sigma_square"] = _maxabs(mm(sg, sg) - pi)
    out["k_is_ij"] = _maxabs(k_e - mm(i_e, jv))
    out["ij_anticommute"] = _maxabs(mm(i_e, jv) + mm(jv, i_e))
    out["ik_anticommute"] = _maxabs(mm(i_e, k_e) + mm(k_e, i_e))
    out["jk_anticommute"] = _maxabs(mm(jv, k_e) + mm(k_e, jv))
    out["jhat_commutes_i"] = _maxabs(mm(jh, i_e) - mm(i_e, jh))
    out["jhat_commutes_k"] = _maxabs(mm(jh, k_e) - mm(k_e, jh))
    out["jhat_commutes_j"] = _maxabs(mm(jh, jv) - mm(jv, jh))

    for nm, e in (("i", i_e), ("k", k_e), ("jhat", jh)):
        om = np.einsum("zai,zaj->zij", e, g)
        out[f"skew_{nm}"] = _maxabs(om + np.swapaxes(om, 1, 2))

    # split of the exterior derivative of the dual 1-form
    gi = C.metric_inv(ctx).val
    dz = red.dzeta(ctx).val
    a_endo = np.einsum("zij,zja->zai", dz, gi)   # dzeta(X,Y) = g(AX, Y)
    jaj = np.einsum("zab,zbc,zci->zai", jv, a_endo, jv)
    out["dzeta_invariant_part"] = _maxabs(0.5 * (a_endo - jaj) - 2.0 * jh)
    out["dzeta_anti_part"] = _maxabs(0.5 * (a_endo + jaj) + k_e)
    out["a_is_2_nabla_xi"] = _maxabs(a_endo - 2.0 * red.nabla_xi(ctx).val)

    # torsion in terms of I and K on horizontal arguments
    nj = nabla_j(ctx).val
    om_i = red.omega_endo(ctx, "I").val
    om_k = red.omega_endo(ctx, "K").val
    rhs = (np.einsum("za,zpq->zpaq", xi, om_i)
           + np.einsum("za,zpq->zpaq", jxi, om_k))
    resid = np.einsum("zpi,zpaq,zqj->ziaj", pi, nj - rhs, pi)
    out["torsion_via_ik"] = _maxabs(resid)
    return out


def transversal_parallel_check(ctx: EvalContext, red: Reduction) -> dict:
    """I and K are parallel in horizontal directions for the induced
    partial connection: all-horizontal components of nabla I, nabla K
    vanish."""
    g = C.metric(ctx).val
    pi = red.pi_h(ctx).val
    out = {}
    for item, getter in (("i", red.i_endo), ("k", red.k_endo)):
        cov = C.covd(ctx, getter(ctx), "ul")[0].val  # (z, x, a, j)
        low = np.einsum("zxaj,zab->zxbj", cov, g)
        proj = np.einsum("zxp,zxbj,zbc,zjq->zpcq", pi, low, pi, pi)
        out[f"parallel_{item}"] = _maxabs(proj)
    return out


# ---------------------------------------------------------------------------
# norms, Laplacians and the contraction identities of the torsion


def norms_and_laplacian_checks(ctx: EvalContext, red: Reduction) -> dict:
    """Pinned norms of the reduced data and eigenform equations."""
    g = C.metric(ctx).val
    gi = C.metric_inv(ctx).val
    jv = j_field(ctx).val
    dz = red.dzeta(ctx).val
    out = {}

    dz_moved = np.einsum("zai,zbj,zab->zij", jv, jv, dz)
    dz11 = 0.5 * (dz + dz_moved)
    dz20 = 0.5 * (dz - dz_moved)
    out["norm_dzeta11"] = float(np.mean(form_norm2(dz11, 2, gi)))
    out["norm_dzeta11_dev"] = _maxabs(form_norm2(dz11, 2, gi) - 8.0)
    out["norm_dzeta20"] = float(np.mean(form_norm2(dz20, 2, gi)))
    out["norm_dzeta20_dev"] = _maxabs(form_norm2(dz20, 2, gi) - 2.0)

    jh = red.jhat(ctx).val
    n_jh = np.einsum("zai,zbj,zab,zij->z", jh, jh, g, gi)
    out["norm_jhat"] = float(np.mean(n_jh))
    out["norm_jhat_dev"] = _maxabs(n_jh - 4.0)

    djz = red.djzeta(ctx).val
    out["norm_djzeta"] = float(np.mean(form_norm2(djz, 2, gi, full=True)))
    out["norm_djzeta_dev"] = _maxabs(form_norm2(djz, 2, gi, full=True) - 36.0)

    om = omega_field(ctx).val
    out["ip_dzeta_omega"] = _maxabs(form_ip(dz, om, 2, gi))
    out["ip_dzeta11_omega"] = _maxabs(form_ip(dz11, om, 2, gi))

    om_i = red.omega_endo(ctx, "I").val
    om_k = red.omega_endo(ctx, "K").val
    out["djzeta_is_m3_omega_i"] = _maxabs(djz + 3.0 * om_i)
    dom = d_omega(ctx).val
    out["interior_xi_domega"] = _maxabs(
        np.einsum("zi,zijk->zjk", red.xi(ctx).val, dom) - 3.0 * om_i)
    out["interior_jxi_domega"] = _maxabs(
        np.einsum("zi,zijk->zjk", red.jxi(ctx).val, dom) - 3.0 * om_k)

    # eigenform equations of the dual 1-forms
    lap_z = form_laplacian_field(red.zeta, 1)(ctx).val
    out["laplacian_zeta"] = _maxabs(lap_z - 10.0 * red.zeta(ctx).val)
    lap_jz = form_laplacian_field(red.jzeta, 1)(ctx).val
    out["laplacian_jzeta"] = _maxabs(lap_jz - 18.0 * red.jzeta(ctx).val)
    out["codifferential_jzeta"] = _maxabs(codifferential(ctx, red.jzeta(ctx), 1).val)

    # contraction of nabla Omega against nabla xi
    n_om = C.covd_field(ctx, omega_field, "ll", key="omega")[0].val  # (z,a,i,j)
    n_xi = C.covd(ctx, red.xi(ctx), "u")[0].val                     # (z,b,m)
    contr = np.einsum("zab,zamj,zbm->zj", gi, n_om, n_xi)
    out["nabla_omega_nabla_xi"] = _maxabs(contr + 2.0 * red.jzeta(ctx).val)

    # spectrum of the deformed metric relative to g, and of sigma
    g0 = red.g0(ctx).val
    ell = np.linalg.cholesky(g)
    x = np.linalg.solve(ell, g0)
    m = np.swapaxes(np.linalg.solve(ell, np.swapaxes(x, 1, 2)), 1, 2)
    spec = np.sort(np.linalg.eigvalsh(0.5 * (m + np.swapaxes(m, 1, 2))), axis=1)
    out["g0_spectrum"] = _maxabs(spec - np.array([0.5, 0.5, 1.0, 1.0, 1.5, 1.5]))

    sg = red.sigma(ctx).val
    out["sigma_trace"] = _maxabs(np.einsum("zaa->z", sg))
    sflat = np.einsum("zia,zaj->zij", g, sg)
    xs = np.linalg.solve(ell, sflat)
    ms = np.swapaxes(np.linalg.solve(ell, np.swapaxes(xs, 1, 2)), 1, 2)
    sspec = np.sort(np.linalg.eigvalsh(0.5 * (ms + np.swapaxes(ms, 1, 2))), axis=1)
    out["sigma_spectrum"] = _maxabs(sspec - np.array([-1.0, -1.0, 0.0, 0.0, 1.0, 1.0]))

    # reconstruction of g from the deformed metric
    rec = (4.0 / 3.0) * (g0 - 0.5 * np.einsum("zia,zaj->zij", g0, sg))
    pi = red.pi_h(ctx).val
    out["g_from_g0"] = _maxabs(np.einsum("zpi,zpq,zqj->zij", pi, rec - g, pi))
    return out


def djxi_check(ctx: EvalContext, red: Reduction) -> dict:
    """Exterior derivative of the contraction of J xi into d Omega."""

    def beta_field(c):
        return J.jj("i,iab->ab", red.jxi(c), d_omega(c))

    dbeta = d_form(ctx, beta_field(ctx), 2).val
    rhs = -12.0 * wedge(red.jzeta(ctx).val, 1, omega_field(ctx).val, 2)
    return {"d_interior_jxi_domega": _maxabs(dbeta - rhs)}


# ---------------------------------------------------------------------------
# Lie derivatives along J xi


def lie_derivative_suite(ctx: EvalContext, red: Reduction) -> dict:
    """Flow of J xi applied to every structure of the reduction."""
    g = C.metric(ctx)
    jv = j_field(ctx)
    jxi = red.jxi(ctx)
    gval = g.val
    out = {}

    def lie(t, kinds):
        return C.lie_derivative(ctx, jxi, t, kinds).val

    def lower(endo_val):
        return np.einsum("zai,zaj->zij", endo_val, gval)

    jh = red.jhat(ctx)
    i_e = red.i_endo(ctx)
    k_e = red.k_endo(ctx)
    jjh = J.jj("ab,bi->ai", jv, jh)

    # metric: L g = 2 g(J jhat . , .)
    out["metric"] = _maxabs(lie(g, "ll") - 2.0 * lower(jjh.val))

    # closed forms stay closed under any flow
    out["dzeta"] = _maxabs(lie(red.dzeta(ctx), "ll"))
    out["djzeta"] = _maxabs(lie(red.djzeta(ctx), "ll"))

    om_k = red.omega_endo(ctx, "K")
    om_jh = red.omega_endo(ctx, "jhat")
    om_i = red.omega_endo(ctx, "I")
    zjz = J.jj("i,j->ij", red.zeta(ctx), red.jzeta(ctx))
    zjz_w = zjz - J.junary("ij->ji", zjz)

    out["omega"] = _maxabs(lie(omega_field(ctx), "ll")
                           - 4.0 * om_k.val + 2.0 * om_jh.val)
    cartan = (np.einsum("zi,zijk->zjk", jxi.val, d_omega(ctx).val)
              - red.dzeta(ctx).val)
    out["omega_cartan_route"] = _maxabs(lie(omega_field(ctx), "ll") - cartan)
    out["j_endo"] = _maxabs(lie(jv, "ul") - 4.0 * k_e.val)

    pi = red.pi_h(ctx)
    j_h = J.jj("ab,bi->ai", jv, pi)
    ijh = J.jj("ab,bi->ai", i_e, jh)
    out["omega_k"] = _maxabs(lie(om_k, "ll")
                             + 4.0 * omega_field(ctx).val - 4.0 * zjz_w.val)
    out["k_endo"] = _maxabs(lie(k_e, "ul") + 4.0 * j_h.val + 2.0 * ijh.val)

    out["omega_jhat"] = _maxabs(lie(om_jh, "ll")
                                + 2.0 * omega_field(ctx).val - 2.0 * zjz_w.val)
    out["jhat_endo"] = _maxabs(lie(jh, "ul"))

    jhk = J.jj("ab,bi->ai", jh, k_e)
    out["omega_i"] = _maxabs(lie(om_i, "ll"))
    out["i_endo"] = _maxabs(lie(i_e, "ul") - 2.0 * jhk.val)

    out["two_omega_jhat"] = _maxabs(2.0 * om_jh.val - red.dzeta(ctx).val - om_k.val)

    sflat = J.jj("ia,aj->ij", g, red.sigma(ctx))
    out["sigma_flat"] = _maxabs(lie(sflat, "ll") + 4.0 * lower(jjh.val))
    out["g0"] = _maxabs(lie(red.g0(ctx), "ll"))

    # transport formula: for alpha = g(A.,.), L alpha = g((L A).,.) + (L g)(A.,.)
    lg = lie(g, "ll")
    for nm, endo, form in (("i", i_e, om_i), ("k", k_e, om_k), ("jhat", jh, om_jh)):
        direct = lie(form, "ll")
        via = (np.einsum("zai,zaj->zij", lie(endo, "ul"), gval)
               + np.einsum("zai,zaj->zij", endo.val, lg))
        out[f"transport_{nm}"] = _maxabs(direct - via)

    # everything is also invariant along xi itself
    xi = red.xi(ctx)
    inv = max(
        _maxabs(C.lie_derivative(ctx, xi, red.g0(ctx), "ll").val),
        _maxabs(C.lie_derivative(ctx, xi, om_i, "ll").val),
        _maxabs(C.lie_derivative(ctx, xi, om_k, "ll").val),
        _maxabs(C.lie_derivative(ctx, xi, jh, "ul").val),
    )
    out["xi_invariance"] = inv
    return out


# ---------------------------------------------------------------------------
# the deformed metric is Kahler in horizontal directions


def g0_connection_check(ctx: EvalContext, red: Reduction) -> dict:
    """Horizontal difference tensor between the two Levi-Civita connections.

    Route one computes the Christoffel symbols of the deformed metric
    directly from its jets; route two evaluates the closed-form expression
    through the derivatives of sigma and of jhat.  Both are compared after
    projecting every slot horizontally.
    """
    g0 = red.g0(ctx)
    gam = C.christoffel(ctx).val
    gam0 = red.g0_christoffel(ctx).val
    pi = red.pi_h(ctx).val
    sg = red.sigma(ctx).val
    g0v = g0.val

    diff = np.einsum("zaxy,zaq->zxyq", gam0 - gam, g0v)

    cov_sigma = C.covd(ctx, red.sigma(ctx), "ul")[0].val   # (z, x, a, y)
    cov_jhat = C.covd(ctx, red.jhat(ctx), "ul")[0].val
    k_e = red.k_endo(ctx).val
    term = cov_sigma + np.einsum("zmx,zmay->zxay", k_e, cov_jhat)
    half = term - 0.5 * np.einsum("zab,zxby->zxay", sg, term)
    rhs = (1.0 / 3.0) * np.einsum("zxay,zaq->zxyq", half, g0v)

    resid = np.einsum("zxp,zyq,zwr,zxyw->zpqr", pi, pi, pi, diff - rhs)
    out = {"difference_tensor": _maxabs(resid)}

    # (pi + sigma/2)(pi - sigma/2) = (3/4) pi
    lhs = np.einsum("zab,zbi->zai", pi + 0.5 * sg, pi - 0.5 * sg)
    out["projector_algebra"] = _maxabs(lhs - 0.75 * pi)
    return out


# ---------------------------------------------------------------------------
# Kahler projection


def kahler_projection_check(ctx: EvalContext, red: Reduction) -> dict:
    """The reduced data projects to a Kahler structure: normalized
    transversal structure, type decomposition, parallelism under the
    deformed connection, and the circle-action phase equation."""
    g0 = red.g0(ctx)
    g0v = g0.val
    pi = red.pi_h(ctx).val
    i0 = red.i0(ctx)
    i0v = i0.val
    out = {}

    out["i0_square"] = _maxabs(np.einsum("zab,zbi->zai", i0v, i0v) + pi)
    moved_g0 = np.einsum("zai,zbj,zab->zij", i0v, i0v, g0v)
    out["i0_compatible"] = _maxabs(
        np.einsum("zpi,zpq,zqj->zij", pi, moved_g0 - g0v, pi))

    om_i = red.omega_endo(ctx, "I").val
    out["omega_i_via_i0"] = _maxabs(om_i - (2.0 / _SQ3)
                                    * np.einsum("zai,zaj->zij", i0v, g0v))

    # omega0_jhat = dzeta / 2, and it is closed
    om0 = red.omega0_jhat(ctx)
    out["omega0_jhat_half_dzeta"] = _maxabs(om0.val - 0.5 * red.dzeta(ctx).val)
    out["omega0_jhat_closed"] = _maxabs(d_form(ctx, om0, 2).val)

    # type split of omega_K with respect to i0
    om_k = red.omega_endo(ctx, "K").val
    om_jh = red.omega_endo(ctx, "jhat").val
    inv, anti = red.omega_k_split(ctx)
    out["omega_k_invariant_part"] = _maxabs(inv.val + (om_k - 2.0 * om_jh) / 3.0)
    out["omega_k_anti_part"] = _maxabs(anti.val - (2.0 / 3.0) * (2.0 * om_k - om_jh))

    om_j = red.omega_j_form(ctx)
    moved_j = np.einsum("zai,zbj,zab->zij", i0v, i0v, om_j.val)
    out["omega_j_anti_invariant"] = _maxabs(moved_j + om_j.val)

    re_p, im_p = red.psi_form(ctx)
    psi = re_p.val + 1j * im_p.val
    out["psi_type"] = _maxabs(np.einsum("zai,zaj->zij", i0v, psi) + 1j * psi)
    out["psi_intermediate_j"] = _maxabs(
        np.einsum("zai,zaj->zij", i0v, om_j.val) + (_SQ3 / 2.0) * anti.val)
    out["psi_intermediate_k"] = _maxabs(
        np.einsum("zai,zaj->zij", i0v, anti.val) - (2.0 / _SQ3) * om_j.val)

    k_e = red.k_endo(ctx).val
    i0k = np.einsum("zab,zbi->zai", i0v, k_e)
    target = (4.0 / _SQ3) * (np.einsum("zai,zaj->zij", k_e, g0v)
                             - 1j * np.einsum("zai,zaj->zij", i0k, g0v))
    out["psi_via_k"] = _maxabs(psi - target)

    g0i = red.g0_inv_val(ctx)
    n2 = form_norm2(re_p.val, 2, g0i) + form_norm2(im_p.val, 2, g0i)
    out["psi_norm"] = float(np.mean(n2))
    out["psi_norm_dev"] = _maxabs(n2 - 64.0 / 3.0)

    # parallelism under the deformed connection, horizontally projected
    def hproj(cov):
        # cov: (z, x, a, j) endo-valued; sandwich all slots with pi
        return np.einsum("zxp,zab,zxbq,zqj->zpaj", pi, pi, cov, pi)

    gam0 = red.g0_christoffel(ctx)
    cov_i0 = C.covd(ctx, i0, "ul", gamma=gam0)[0].val
    out["i0_parallel"] = _maxabs(hproj(cov_i0))
    cov_k = C.covd(ctx, red.k_endo(ctx), "ul", gamma=gam0)[0].val
    out["k_parallel"] = _maxabs(hproj(cov_k))

    def fproj(cov):
        # cov: (z, x, i, j) form-valued
        return np.einsum("zxp,zxab,zai,zbj->zpij", pi, cov, pi, pi)

    cov_re = C.covd(ctx, re_p, "ll", gamma=gam0)[0].val
    cov_im = C.covd(ctx, im_p, "ll", gamma=gam0)[0].val
    out["psi_parallel"] = max(_maxabs(fproj(cov_re)), _maxabs(fproj(cov_im)))

    # normalized circle action: zeta'(xi') = 1 and L_{xi'} Psi = i Psi
    zp = red.zeta_prime(ctx)
    xip = (1.0 / (2.0 * _SQ3)) * red.jxi(ctx)
    out["zeta_prime_pairing"] = _maxabs(
        np.einsum("zi,zi->z", zp.val, xip.val) - 1.0)
    dzp = d_form(ctx, zp, 1).val
    out["dzeta_prime_omega_i"] = _maxabs(dzp + 6.0 * _SQ3 * om_i)
    out["dzeta_prime_i0"] = _maxabs(
        dzp + 12.0 * np.einsum("zai,zaj->zij", i0v, g0v))
    lre = C.lie_derivative(ctx, xip, re_p, "ll").val
    lim = C.lie_derivative(ctx, xip, im_p, "ll").val
    out["phase_equation"] = max(_maxabs(lre + im_p.val), _maxabs(lim - re_p.val))
    return out


# ---------------------------------------------------------------------------
# integrand identity on the four-dimensional base


def sekigawa_terms_at(chart, points, mode: str = "exact",
                      einstein_tol: float = 1e-6) -> dict:
    """Terms of the integral identity for almost Kahler Einstein 4-metrics.

    The chart must carry ``metric`` and ``Jhat`` evaluators on a
    4-dimensional base.  Raises ``NonEinsteinBaseError`` when the metric
    is not Einstein, since the identity is derived under that hypothesis.
    Returns every named term together with both sides of the identity.
    """
    ctx = EvalContext(chart, np.atleast_2d(points), 4, mode=mode)
    g = C.metric(ctx)
    gi = C.metric_inv(ctx)
    scal = C.scalar_curvature(ctx).val
    ric = C.ricci(ctx).val
    ein = ric - (scal[:, None, None] / 4.0) * g.val
    if _maxabs(ein) > einstein_tol:
        raise NonEinsteinBaseError(
            f"base metric is not Einstein (residual {_maxabs(ein):.3e}); "
            "the integrand identity does not apply")

    def jhat_f(c):
        return c.root("Jhat")

    def om_f(c):
        return J.jj("ai,aj->ij", jhat_f(c), C.metric(c))

    def rop_f(c):
        gic = C.metric_inv(c)
        omu1 = J.jj("ka,kl->al", gic, om_f(c))
        omu = J.jj("lb,al->ab", gic, omu1)
        return -0.5 * J.jj("kl,klij->ij", omu, C.riemann_lower(c))

    def sstar_f(c):
        gic = C.metric_inv(c)
        r1 = J.jj("ia,ij->aj", gic, rop_f(c))
        ru = J.jj("jb,aj->ab", gic, r1)
        return J.jj("ab,ab->", ru, om_f(c))

    out = {"scal": float(np.mean(scal))}
    out["sstar"] = float(np.mean(sstar_f(ctx).val))

    lap_sstar = form_laplacian_field(sstar_f, 0)(ctx).val
    out["laplacian_sstar"] = float(np.mean(lap_sstar))

    # divergence of the pairing of the star-Ricci form with nabla Omega
    nab_om = C.covd_field(ctx, om_f, "ll", key="base_omega")[0]

    def pair_f(c):
        gic = C.metric_inv(c)
        no = C.covd_field(c, om_f, "ll", key="base_omega")[0]
        up1 = J.jj("ia,xij->xaj", gic, no)
        up = J.jj("jc,xaj->xac", gic, up1)
        return 0.5 * J.jj("xac,ac->x", up, rop_f(c))

    delta_pair = codifferential(ctx, pair_f(ctx), 1).val
    out["div_rho_nabla_omega"] = float(np.mean(np.abs(delta_pair)))

    gv, giv = g.val, gi.val
    jhat = ctx.root("Jhat").val
    no = nab_om.val                          # (z, x, i, j)

    # phi(X, Y) = <nabla_{Jhat X} Omega, nabla_Y Omega>
    inner = np.einsum("zxij,zia,zjb,zyab->zxy", no, giv, giv, no) / 2.0
    phi = np.einsum("zmx,zmy->zxy", jhat, inner)
    out["norm_phi"] = float(np.mean(
        np.einsum("zxy,zxa,zyb,zab->z", phi, giv, giv, phi)))

    # |nabla Omega|^2 and the rough Laplacian of Omega
    out["norm_nabla_omega"] = float(np.mean(
        np.einsum("zxy,zxij,zia,zjb,zyab->z", giv, no, giv, giv, no) / 2.0))
    d2om = C.second_covd_field(ctx, om_f, "ll", key="base_omega")[0].val
    rough = -np.einsum("zab,zabij->zij", giv, d2om)
    out["norm_rough_omega"] = float(np.mean(form_norm2(rough, 2, giv)))

    # curvature block on anti-invariant 2-forms, anti-linear part
    nb = ctx.nbatch
    rl = C.riemann_lower(ctx).val
    r2 = np.zeros(nb)
    rng = np.random.default_rng(0)
    for z in range(nb):
        f1 = rng.standard_normal(4)
        f1 /= math.sqrt(f1 @ gv[z] @ f1)
        f2 = jhat[z] @ f1
        raw = rng.standard_normal(4)
        raw -= (raw @ gv[z] @ f1) * f1 + (raw @ gv[z] @ f2) * f2
        f3 = raw / math.sqrt(raw @ gv[z] @ raw)
        f4 = jhat[z] @ f3
        cov = [gv[z] @ f for f in (f1, f2, f3, f4)]

        def wf(a, b):
            return np.einsum("i,j->ij", a, b) - np.einsum("i,j->ij", b, a)

        b1 = (wf(cov[0], cov[2]) - wf(cov[1], cov[3])) / math.sqrt(2.0)
        b2 = (wf(cov[0], cov[3]) + wf(cov[1], cov[2])) / math.sqrt(2.0)
        bmat = np.zeros((2, 2))
        basis = (b1, b2)
        for a_i, ba in enumerate(basis):
            rba = -0.5 * np.einsum("kl,klij->ij",
                                   giv[z] @ ba @ giv[z], rl[z])
            for b_i, bb in enumerate(basis):
                bmat[a_i, b_i] = form_ip(rba[None], bb[None], 2, giv[z][None])[0]
        rot = np.array([[0.0, 1.0], [-1.0, 0.0]])
        banti = 0.5 * (bmat + rot @ bmat @ rot)
        r2[z] = np.sum(banti**2)
    out["norm_r_anti"] = float(np.mean(r2))

    lhs = lap_sstar - 8.0 * delta_pair
    rhs = (-8.0 * r2
           - form_norm2(rough, 2, giv)
           - np.einsum("zxy,zxa,zyb,zab->z", phi, giv, giv, phi)
           - (scal / 4.0) * np.einsum(
               "zxy,zxij,zia,zjb,zyab->z", giv, no, giv, giv, no) / 2.0)
    out["lhs"] = float(np.mean(np.abs(lhs)))
    out["rhs"] = float(np.mean(np.abs(rhs)))
    out["identity_residual"] = _maxabs(lhs - rhs)
    return out


def base_kahler_check(chart, points, mode: str = "exact") -> dict:
    """Kahler-Einstein normalization of the 4-dimensional base model.

    Requires ``metric``, ``I0`` and ``Jhat`` evaluators: the integrable
    structure must be parallel, the opposite-orientation structure too,
    both fundamental forms closed, and the metric Einstein with constant
    twelve.
    """
    ctx = EvalContext(chart, np.atleast_2d(points), 2, mode=mode)
    g = C.metric(ctx)
    gv = g.val
    ric = C.ricci(ctx).val
    out = {"einstein_12": _maxabs(ric - 12.0 * gv)}

    eye = np.eye(chart.dim)
    for nm in ("I0", "Jhat"):
        e = ctx.root(nm)
        ev = e.val
        out[f"{nm.lower()}_square"] = _maxabs(
            np.einsum("zab,zbi->zai", ev, ev) + eye)
        out[f"{nm.lower()}_compatible"] = _maxabs(
            np.einsum("zai,zbj,zab->zij", ev, ev, gv) - gv)
        out[f"{nm.lower()}_parallel"] = _maxabs(
            C.covd(ctx, e, "ul")[0].val)

        def om_f(c, _nm=nm):
            return J.jj("ai,aj->ij", c.root(_nm), C.metric(c))

        out[f"{nm.lower()}_form_closed"] = _maxabs(d_form(ctx, om_f(ctx), 2).val)

    i0 = ctx.root("I0").val
    jh = ctx.root("Jhat").val
    out["i0_jhat_commute"] = _maxabs(
        np.einsum("zab,zbi->zai", i0, jh) - np.einsum("zab,zbi->zai", jh, i0))
    return out


# ---------------------------------------------------------------------------
# canonical Hermitian connection


def canonical_connection_checks(ctx: EvalContext, red: Reduction, rng=None) -> dict:
    """The torsion-adapted connection preserves g, J and the splitting
    into the two parallel rank-3 distributions exchanged by J."""
    if rng is None:
        rng = np.random.default_rng(0)
    gb = red.gamma_bar(ctx)
    g = C.metric(ctx)
    out = {}
    out["metric_parallel"] = _maxabs(C.covd(ctx, g, "ll", gamma=gb)[0].val)
    out["j_parallel"] = _maxabs(C.covd(ctx, j_field(ctx), "ul", gamma=gb)[0].val)

    cov_xi = C.covd(ctx, red.xi(ctx), "u", gamma=gb)[0].val  # (z, i, a)
    sg = red.sigma(ctx).val
    jh = red.jhat(ctx).val
    target = np.einsum("zab,zbi->zai", sg + np.eye(ctx.chart.dim), jh)
    out["xi_derivative"] = _maxabs(np.swapaxes(cov_xi, 1, 2) - target)

    # horizontal-horizontal part of nabla sigma (Levi-Civita) vanishes
    pi = red.pi_h(ctx).val
    cov_sg = C.covd(ctx, red.sigma(ctx), "ul")[0].val
    proj = np.einsum("zxp,zab,zxbj,zjq->zpaq", pi, pi, cov_sg, pi)
    out["sigma_transversal_parallel"] = _maxabs(proj)

    # distributions spanned by xi with the +1 eigenspace of sigma, and its
    # J-image: both are preserved by the connection
    xi, jxi = red.xi(ctx), red.jxi(ctx)
    p_plus = 0.5 * (red.pi_h(ctx) + red.sigma(ctx))
    p_minus = 0.5 * (red.pi_h(ctx) - red.sigma(ctx))
    pi_e = p_plus + J.jj("a,i->ai", xi, red.zeta(ctx))
    pi_f = p_minus + J.jj("a,i->ai", jxi, red.jzeta(ctx))

    jval = j_field(ctx).val
    out["j_maps_e_to_f"] = _maxabs(
        np.einsum("zab,zbi->zai", jval, pi_e.val)
        - np.einsum("zab,zbi->zai", pi_f.val, np.einsum("zab,zbi->zai", jval, pi_e.val)))

    out["e_projector_parallel"] = _maxabs(C.covd(ctx, pi_e, "ul", gamma=gb)[0].val)

    worst = 0.0
    d = ctx.chart.dim
    for _ in range(3):
        w = rng.standard_normal(d)
        wj = J.jconst(ctx.space, np.broadcast_to(w, (ctx.nbatch, d)).copy())
        y_plus = J.jj("ai,i->a", pi_e, wj)
        y_minus = J.jj("ai,i->a", pi_f, wj)
        cov_p = C.covd(ctx, y_plus, "u", gamma=gb)[0].val   # (z, u, a)
        cov_m = C.covd(ctx, y_minus, "u", gamma=gb)[0].val
        eye = np.eye(d)
        worst = max(worst,
                    _maxabs(np.einsum("zab,zub->zua", eye - pi_e.val, cov_p)),
                    _maxabs(np.einsum("zab,zub->zua", eye - pi_f.val, cov_m)))
    out["splitting_parallel"] = worst
    return out
