"""Truncated multivariate Taylor arithmetic ("jets").

A jet stores, for a batch of base points, the Taylor coefficients of a
tensor-valued function up to a fixed total degree.  Arithmetic on jets
propagates derivatives exactly (no step-size error), which is what makes
the curvature residuals in this package hit 1e-9 territory instead of the
1e-4 typical of finite differencing.

Layout convention: coefficient arrays have shape ``(*tensor_shape, ncoef,
nbatch)``.  The coefficient axis enumerates monomials in graded
lexicographic order; ``c[..., k, :]`` is the coefficient of the monomial
``x^m / 1`` -- i.e. coefficients are *Taylor* coefficients, already divided
by the factorials, so the value of the jet at displacement h is simply
``sum_k c[..., k, :] * h^{m_k}``.

Each jet carries ``ok``, the derivative order up to which its coefficients
are trustworthy.  Multiplying two jets keeps ``min`` of the operands' ok;
taking a partial derivative lowers it by one.  Downstream code asserts
``ok >= 0`` before reading values, which turns silent order-budget
overruns into hard errors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "JetSpace",
    "Jet",
    "jetspace",
    "seed_coordinates",
    "jconst",
    "jj",
    "jc",
    "jb",
    "junary",
    "jpartial",
    "jgrad",
    "jsin",
    "jcos",
    "jexp",
    "jsqrt",
    "jlog",
    "jrecip",
    "jentire",
    "jcompose",
    "jmatinv",
    "SINC_SQRT",
    "COS_SQRT",
    "VERSINE_RATIO",
    "SINC_DEFECT",
]


def _monomials(nvars: int, order: int):
    """All exponent tuples with total degree <= order, graded lex order."""
    out = []
    for deg in range(order + 1):
        for c in itertools.combinations_with_replacement(range(nvars), deg):
            m = [0] * nvars
            for v in c:
                m[v] += 1
            out.append(tuple(m))
    # combinations_with_replacement is lex within a degree; good enough, but
    # keep a deterministic canonical order by sorting within each degree.
    out.sort(key=lambda m: (sum(m), m))
    return out


class JetSpace:
    """Index tables for jets in ``nvars`` variables at a given order."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        self.monomials = _monomials(nvars, order)
        self.ncoef = len(self.monomials)
        self.index = {m: i for i, m in enumerate(self.monomials)}
        self.degree = np.array([sum(m) for m in self.monomials])

        # Multiplication table: all coefficient pairs (a, b) whose monomial
        # product still fits in the space, pre-sorted by target index so a
        # single reduceat performs the segment sums.
        pairs = []
        for ia, ma in enumerate(self.monomials):
            da = sum(ma)
            for ib, mb in enumerate(self.monomials):
                if da + sum(mb) > order:
                    continue
                mt = tuple(x + y for x, y in zip(ma, mb))
                pairs.append((self.index[mt], ia, ib))
        pairs.sort()
        tgt = np.array([p[0] for p in pairs])
        self.mul_a = np.array([p[1] for p in pairs])
        self.mul_b = np.array([p[2] for p in pairs])
        # Every target index occurs (the pair (m, 0) exists), so segment
        # starts align one-to-one with coefficient indices.
        self.mul_seg = np.searchsorted(tgt, np.arange(self.ncoef))

        # Partial-derivative tables: d/dx_v of coefficient of m comes from
        # the coefficient of m + e_v scaled by (m_v + 1).
        self.dsrc = np.zeros((nvars, self.ncoef), dtype=np.int64)
        self.dfac = np.zeros((nvars, self.ncoef))
        for v in range(nvars):
            for i, m in enumerate(self.monomials):
                up = list(m)
                up[v] += 1
                j = self.index.get(tuple(up))
                if j is None:
                    self.dsrc[v, i] = 0
                    self.dfac[v, i] = 0.0
                else:
                    self.dsrc[v, i] = j
                    self.dfac[v, i] = m[v] + 1

    def __repr__(self):  # pragma: no cover
        return f"JetSpace(nvars={self.nvars}, order={self.order}, ncoef={self.ncoef})"


@lru_cache(maxsize=None)
def jetspace(nvars: int, order: int) -> JetSpace:
    return JetSpace(nvars, order)


@dataclass
class Jet:
    """Batched jet of a tensor-valued function.  See module docstring."""

    space: JetSpace
    c: np.ndarray  # (*tshape, ncoef, nbatch)
    ok: int

    @property
    def tshape(self):
        return self.c.shape[:-2]

    @property
    def nbatch(self) -> int:
        return self.c.shape[-1]

    @property
    def val(self) -> np.ndarray:
        """Value part, batch axis first: shape (nbatch, *tshape)."""
        if self.ok < 0:
            raise ValueError("jet consumed more derivative orders than seeded")
        return np.moveaxis(self.c[..., 0, :], -1, 0)

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.space, self.c + other.c, min(self.ok, other.ok))
        out = self.c.copy()
        out[..., 0, :] = out[..., 0, :] + other
        return Jet(self.space, out, self.ok)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(self.space, self.c - other.c, min(self.ok, other.ok))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Jet(self.space, -self.c, self.ok)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jj(",->", self, other)
        return Jet(self.space, self.c * other, self.ok)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * jrecip(other)
        return Jet(self.space, self.c / other, self.ok)

    def transpose(self, *axes) -> "Jet":
        """Permute tensor axes (coefficient and batch axes stay last)."""
        n = len(self.tshape)
        perm = list(axes) + [n, n + 1]
        return Jet(self.space, self.c.transpose(perm), self.ok)


def seed_coordinates(space: JetSpace, points: np.ndarray) -> Jet:
    """Identity jet of the coordinates: shape (nvars,), exact to any order.

    ``points`` has shape (nbatch, nvars).
    """
    nb, nv = points.shape
    if nv != space.nvars:
        raise ValueError("point dimension does not match jet space")
    c = np.zeros((nv, space.ncoef, nb))
    c[:, 0, :] = points.T
    for v in range(nv):
        e = tuple(1 if i == v else 0 for i in range(nv))
        if space.order >= 1:
            c[v, space.index[e], :] = 1.0
    return Jet(space, c, space.order)


def jconst(space: JetSpace, values: np.ndarray, batch_last: bool = False) -> Jet:
    """Jet of a constant (all derivatives zero).

    ``values`` has shape (nbatch, *tshape) unless ``batch_last``.
    """
    if not batch_last:
        values = np.moveaxis(np.asarray(values, dtype=float), 0, -1)
    tshape = values.shape[:-1]
    nb = values.shape[-1]
    c = np.zeros((*tshape, space.ncoef, nb))
    c[..., 0, :] = values
    return Jet(space, c, space.order)


def _split_spec(spec: str):
    lhs, rhs = spec.split("->")
    a, b = lhs.split(",")
    return a, b, rhs


def jj(spec: str, x: Jet, y: Jet) -> Jet:
    """Binary einsum over tensor axes of two jets, e.g. ``jj('ab,b->a', g, v)``.

    Coefficient multiplication uses the space's pair table; 'p' and 'z' are
    reserved for the pair and batch axes.
    """
    sp = x.space
    a, b, rhs = _split_spec(spec)
    ga = x.c[..., sp.mul_a, :]
    gb = y.c[..., sp.mul_b, :]
    prod = np.einsum(f"{a}pz,{b}pz->{rhs}pz", ga, gb)
    out = np.add.reduceat(prod, sp.mul_seg, axis=-2)
    return Jet(sp, out, min(x.ok, y.ok))


def jc(spec: str, const: np.ndarray, x: Jet) -> Jet:
    """Einsum of a plain constant array (no batch axis) with a jet."""
    a, b, rhs = _split_spec(spec)
    out = np.einsum(f"{a},{b}pz->{rhs}pz", const, x.c)
    return Jet(x.space, out, x.ok)


def jb(spec: str, const_b: np.ndarray, x: Jet) -> Jet:
    """Einsum of a per-batch constant (shape (nbatch, *cshape)) with a jet."""
    a, b, rhs = _split_spec(spec)
    cb = np.moveaxis(np.asarray(const_b, dtype=float), 0, -1)
    out = np.einsum(f"{a}z,{b}pz->{rhs}pz", cb, x.c)
    return Jet(x.space, out, x.ok)


def junary(spec: str, x: Jet) -> Jet:
    """Unary einsum (trace / transpose / diagonal) on the tensor axes."""
    lhs, rhs = spec.split("->")
    out = np.einsum(f"{lhs}pz->{rhs}pz", x.c)
    return Jet(x.space, out, x.ok)


def jpartial(x: Jet, var: int) -> Jet:
    """Partial derivative along coordinate ``var``; costs one order of trust."""
    sp = x.space
    out = x.c[..., sp.dsrc[var], :] * sp.dfac[var][:, None]
    return Jet(sp, out, x.ok - 1)


def jgrad(x: Jet) -> Jet:
    """Stack all partials; the new derivative axis becomes tensor axis 0."""
    sp = x.space
    out = np.stack([x.c[..., sp.dsrc[v], :] * sp.dfac[v][:, None] for v in range(sp.nvars)])
    return Jet(sp, out, x.ok - 1)


# ---------------------------------------------------------------------------
# scalar function composition


def jcompose(u: Jet, coeffs: list[np.ndarray]) -> Jet:
    """Compose a scalar jet with a univariate Taylor series.

    ``coeffs[k]`` is ``f^{(k)}(u0)/k!`` as an array over the batch.  Horner
    evaluation in the nilpotent part ``u - u0``.
    """
    sp = u.space
    du = u.c.copy()
    du[..., 0, :] = 0.0
    dU = Jet(sp, du, u.ok)
    res = jconst(sp, coeffs[-1], batch_last=True)
    for k in range(len(coeffs) - 2, -1, -1):
        res = jj(",->", res, dU) + jconst(sp, coeffs[k], batch_last=True)
    return Jet(sp, res.c, u.ok)


def _series_cycle(u: Jet, f0, f1, f2, f3):
    """Series whose derivatives cycle with period 4 (sin/cos)."""
    u0 = u.c[..., 0, :]
    cyc = [f0(u0), f1(u0), f2(u0), f3(u0)]
    coeffs = [cyc[k % 4] / math.factorial(k) for k in range(u.space.order + 1)]
    return jcompose(u, coeffs)


def jsin(u: Jet) -> Jet:
    return _series_cycle(u, np.sin, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x))


def jcos(u: Jet) -> Jet:
    return _series_cycle(u, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x), np.sin)


def jexp(u: Jet) -> Jet:
    u0 = u.c[..., 0, :]
    e = np.exp(u0)
    coeffs = [e / math.factorial(k) for k in range(u.space.order + 1)]
    return jcompose(u, coeffs)


def jsqrt(u: Jet) -> Jet:
    u0 = u.c[..., 0, :]
    coeffs = [np.sqrt(u0)]
    for k in range(1, u.space.order + 1):
        coeffs.append(coeffs[-1] * (0.5 - (k - 1)) / (k * u0))
    return jcompose(u, coeffs)


def jrecip(u: Jet) -> Jet:
    u0 = u.c[..., 0, :]
    coeffs = [(-1.0) ** k * u0 ** (-k - 1) for k in range(u.space.order + 1)]
    return jcompose(u, coeffs)


def jlog(u: Jet) -> Jet:
    u0 = u.c[..., 0, :]
    coeffs = [np.log(u0)]
    for k in range(1, u.space.order + 1):
        coeffs.append((-1.0) ** (k + 1) * u0 ** (-k) / k)
    return jcompose(u, coeffs)


def jentire(u: Jet, series: np.ndarray) -> Jet:
    """Compose with an entire function given by its Maclaurin coefficients.

    The shifted Taylor coefficients at u0 are ``c_k = sum_m a_m C(m,k)
    u0^{m-k}``; for the rapidly decaying series used here (sinc-type) the
    sum converges to machine precision well before ``m = len(series)``.
    """
    u0 = u.c[..., 0, :]
    M = len(series)
    coeffs = []
    for k in range(u.space.order + 1):
        acc = np.zeros_like(u0)
        pw = np.ones_like(u0)  # u0^{m-k}
        binom = 1.0  # C(m, k) starting at m = k
        for m in range(k, M):
            acc = acc + series[m] * binom * pw
            pw = pw * u0
            binom = binom * (m + 1) / (m + 1 - k)
        coeffs.append(acc)
    return jcompose(u, coeffs)


def _entire_coeffs(fn, M: int = 40) -> np.ndarray:
    return np.array([fn(m) for m in range(M)])


# sin(sqrt(s))/sqrt(s), cos(sqrt(s)) and friends -- analytic in s = |v|^2,
# which sidesteps the sqrt branch point at v = 0 in exponential charts.
SINC_SQRT = _entire_coeffs(lambda m: (-1.0) ** m / math.factorial(2 * m + 1))
COS_SQRT = _entire_coeffs(lambda m: (-1.0) ** m / math.factorial(2 * m))
# (1 - cos(2 sqrt(s))) / (2 s)
VERSINE_RATIO = _entire_coeffs(lambda j: (-1.0) ** j * 4.0 ** (j + 1) / (2 * math.factorial(2 * j + 2)))
# (1 - sinc(2 sqrt(s))) / s
SINC_DEFECT = _entire_coeffs(lambda j: (-1.0) ** j * 4.0 ** (j + 1) / math.factorial(2 * j + 3))


# ---------------------------------------------------------------------------
# matrix inverse


def jmatinv(g: Jet) -> Jet:
    """Inverse of a square-matrix jet via the truncated Neumann series.

    Writing g = g0 (I + N) with N nilpotent in the truncated algebra,
    g^{-1} = (I + sum (-N)^j) g0^{-1}; the series terminates at the jet
    order, so the result is exact.
    """
    sp = g.space
    d = g.tshape[-1]
    g0 = np.moveaxis(g.c[..., 0, :], -1, 0)  # (B, d, d)
    inv0 = np.linalg.inv(g0)
    inv0j = jconst(sp, inv0)
    dg = g.c.copy()
    dg[..., 0, :] = 0.0
    n = jb("ab,bc->ac", inv0, Jet(sp, dg, g.ok))  # N = g0^{-1} (g - g0)
    eye = jconst(sp, np.broadcast_to(np.eye(d), g0.shape).copy())
    acc = eye
    term = eye
    for _ in range(sp.order):
        term = jj("ab,bc->ac", term, n)
        term = Jet(sp, -term.c, term.ok)
        acc = acc + term
    out = jj("ab,bc->ac", acc, inv0j)
    return Jet(sp, out.c, g.ok)
