"""Charts, evaluation contexts and pointwise value types.

A :class:`ChartMap` is a named open coordinate box together with a set of
field evaluators.  Evaluators are written once, against jets: each takes
an :class:`EvalContext` and returns a :class:`~nklab.jets.Jet`.  Because a
context seeded at order ``k`` carries full Taylor data, every derived
quantity (curvature, Laplacians, Lie derivatives) is obtained by exact
coefficient manipulation -- no re-evaluation, no step size.

The context also implements the "extrapolated-differences" engine mode:
root evaluators are then sampled on stencils and their jets rebuilt by
finite differences, while all *derived* computations stay identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets as J
from .findiff import fd_jet

__all__ = [
    "NKLabError",
    "OutOfDomainError",
    "DegenerateMetricError",
    "DegenerateFrameError",
    "DegeneratePairError",
    "NonEinsteinBaseError",
    "InvariantViolation",
    "ConfigError",
    "ChartMap",
    "EvalContext",
    "TensorValue",
    "sample_points",
    "unit_tangent_vectors",
    "gram_schmidt",
]


class NKLabError(Exception):
    """Base class for all structured errors raised by this package."""


class OutOfDomainError(NKLabError):
    pass


class DegenerateMetricError(NKLabError):
    pass


class DegenerateFrameError(NKLabError):
    pass


class DegeneratePairError(NKLabError):
    """Raised when a sampled vector pair spans a J-invariant plane."""


class NonEinsteinBaseError(NKLabError):
    pass


class InvariantViolation(NKLabError):
    """A structural invariant failed during construction (names the identity)."""

    def __init__(self, identity: str, residual: float):
        self.identity = identity
        self.residual = residual
        super().__init__(f"invariant '{identity}' violated (residual {residual:.3e})")


class ConfigError(NKLabError):
    pass


class ChartMap:
    """Coordinate box plus jet evaluators for the fields living on it.

    Parameters
    ----------
    name : str
        Identifier used in reports and error messages.
    box : sequence of (lo, hi)
        Open coordinate ranges; evaluation outside raises OutOfDomainError.
    evaluators : dict
        name -> callable(ctx) -> Jet.  'metric' is mandatory.  The metric
        is validated to be symmetric positive definite on construction.
    orientation : +1 or -1, optional
        Sign of the preferred volume form against the coordinate one.
    """

    def __init__(self, name, box, evaluators, orientation=1.0, meta=None):
        self.name = name
        self.box = [(float(a), float(b)) for a, b in box]
        self.dim = len(self.box)
        if "metric" not in evaluators:
            raise ConfigError(f"chart '{name}' has no metric evaluator")
        self.evaluators = dict(evaluators)
        self.orientation = float(orientation)
        self.meta = dict(meta or {})
        self._validate_metric()

    def _validate_metric(self):
        pts = sample_points(self, 8, np.random.default_rng(0))
        ctx = EvalContext(self, pts, order=0)
        g = ctx.root("metric").val
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError as e:
            raise DegenerateMetricError(f"metric on chart '{self.name}' is not positive definite") from e
        if np.max(np.abs(g - np.swapaxes(g, -1, -2))) > 1e-12:
            raise DegenerateMetricError(f"metric on chart '{self.name}' is not symmetric")

    def contains(self, points: np.ndarray, margin: float = 0.0) -> np.ndarray:
        lo = np.array([b[0] for b in self.box]) + margin
        hi = np.array([b[1] for b in self.box]) - margin
        return np.all((points > lo) & (points < hi), axis=-1)

    def center(self) -> np.ndarray:
        return np.array([(a + b) / 2.0 for a, b in self.box])

    def has(self, name: str) -> bool:
        return name in self.evaluators


class EvalContext:
    """Jets of every requested field at a fixed batch of chart points.

    ``order`` is the derivative budget: expressions consuming more than
    ``order`` derivative levels in total raise through the jets' ``ok``
    bookkeeping instead of returning garbage.
    """

    def __init__(self, chart: ChartMap, points: np.ndarray, order: int, mode: str = "exact"):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != chart.dim:
            raise ConfigError("points do not match chart dimension")
        if not np.all(chart.contains(points)):
            raise OutOfDomainError(f"points outside the domain of chart '{chart.name}'")
        if mode not in ("exact", "fd"):
            raise ConfigError(f"unknown derivative mode '{mode}'")
        self.chart = chart
        self.points = points
        self.order = order
        self.mode = mode
        self.space = J.jetspace(chart.dim, order)
        self.coords = J.seed_coordinates(self.space, points)
        self._memo: dict = {}

    @property
    def nbatch(self) -> int:
        return self.points.shape[0]

    def coord(self, i: int) -> J.Jet:
        return J.Jet(self.space, self.coords.c[i], self.coords.ok)

    def root(self, name: str) -> J.Jet:
        """Jet of a chart evaluator (memoized)."""
        key = ("root", name)
        if key not in self._memo:
            fn = self.chart.evaluators.get(name)
            if fn is None:
                raise ConfigError(f"chart '{self.chart.name}' has no evaluator '{name}'")
            if self.mode == "exact":
                self._memo[key] = fn(self)
            else:
                def values(pts, _fn=fn):
                    sub = EvalContext(self.chart, pts, order=0)
                    return _fn(sub).val

                self._memo[key] = fd_jet(values, self.points, self.space)
        return self._memo[key]

    def memo(self, key, builder):
        """Cache arbitrary derived jets under a hashable key."""
        if key not in self._memo:
            self._memo[key] = builder(self)
        return self._memo[key]


@dataclass
class TensorValue:
    """Pointwise tensor components with index-character bookkeeping.

    ``kinds`` is one character per tensor axis: 'u' (contravariant) or 'l'
    (covariant).  ``components`` has the batch axis first.
    """

    components: np.ndarray
    kinds: str
    points: np.ndarray = field(default=None, repr=False)

    @property
    def valence(self):
        return (self.kinds.count("u"), self.kinds.count("l"))

    def _musical(self, axis, g, ginv, to):
        k = list(self.kinds)
        if k[axis] == to:
            return self
        mat = g if to == "l" else ginv
        n = self.components.ndim - 1
        src = chr(ord("a") + axis)
        letters = [chr(ord("a") + i) for i in range(n)]
        out_letters = letters.copy()
        out_letters[axis] = "Z"
        spec = f"z{''.join(letters)},z{src}Z->z{''.join(out_letters)}"
        comp = np.einsum(spec, self.components, mat)
        k[axis] = to
        return TensorValue(comp, "".join(k), self.points)

    def lower(self, axis: int, g: np.ndarray, ginv: np.ndarray) -> "TensorValue":
        return self._musical(axis, g, ginv, "l")

    def raise_(self, axis: int, g: np.ndarray, ginv: np.ndarray) -> "TensorValue":
        return self._musical(axis, g, ginv, "u")


# ---------------------------------------------------------------------------
# sampling helpers


def sample_points(chart: ChartMap, n: int, rng, margin_frac: float = 0.05) -> np.ndarray:
    """Uniform points in the chart box, keeping a safety margin off the walls."""
    lo = np.array([b[0] for b in chart.box])
    hi = np.array([b[1] for b in chart.box])
    w = hi - lo
    return rng.uniform(lo + margin_frac * w, hi - margin_frac * w, size=(n, chart.dim))


def unit_tangent_vectors(g: np.ndarray, rng, n_per_point: int = 1, project=None) -> np.ndarray:
    """Random g-unit tangent vectors, shape (nbatch, n_per_point, dim).

    ``project`` optionally maps raw vectors (e.g. onto a distribution)
    before normalization.
    """
    nb, d = g.shape[0], g.shape[-1]
    v = rng.standard_normal((nb, n_per_point, d))
    if project is not None:
        v = project(v)
    nrm = np.sqrt(np.einsum("bnd,bde,bne->bn", v, g, v))
    if np.any(nrm < 1e-8):
        raise DegenerateFrameError("sampled tangent vector collapsed under projection")
    return v / nrm[..., None]


def gram_schmidt(vectors: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Batched g-orthonormalization of rows of ``vectors`` (nbatch, k, dim)."""
    out = np.array(vectors, dtype=float, copy=True)
    k = out.shape[1]
    for i in range(k):
        for j in range(i):
            proj = np.einsum("bd,bde,be->b", out[:, i], g, out[:, j])
            out[:, i] -= proj[:, None] * out[:, j]
        nrm = np.sqrt(np.einsum("bd,bde,be->b", out[:, i], g, out[:, i]))
        if np.any(nrm < 1e-10):
            raise DegenerateFrameError("Gram-Schmidt received linearly dependent seeds")
        out[:, i] /= nrm[:, None]
    return out
