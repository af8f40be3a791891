"""Point clouds and pluggable distance oracles.

Distances come in three user-facing families:

* ``Lp(p)``, the usual Minkowski metrics on coordinates,
* ``Snowflake(base, theta)``, the theta-th power of a metric (still a metric
  for theta in (0, 1], multiplies dimension by 1/theta),
* ``PowerQuasi(base, p)``, the p-th power for p >= 1, which is only a
  quasi-metric: it satisfies d(x,y) <= C_w (d(x,z) + d(z,y)) with
  C_w = 2**(p-1) instead of the triangle inequality.

Each spec declares its weak-triangle constant analytically from its kind;
``validate_quasi_metric`` can only falsify the declaration, never tighten it.
All oracles are pure functions of their arguments and exactly symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InputError
from .reports import format_float

__all__ = [
    "PointCloud",
    "DistanceSpec",
    "Lp",
    "Snowflake",
    "PowerQuasi",
    "Scaled",
    "distance",
    "validate_quasi_metric",
    "QuasiMetricReport",
    "rescale_to_unit_diameter",
    "RescaledSpace",
    "diameter",
    "spec_from_string",
    "read_cloud",
    "write_cloud",
]


class PointCloud:
    """An ordered, immutable list of d-dimensional points.

    Point order is significant: it seeds deterministic tie-breaking in tree
    construction and the scan order of greedy packing. Duplicate points are
    allowed; downstream code treats the zero-length edges they induce
    explicitly.
    """

    __slots__ = ("points",)

    def __init__(self, points):
        try:
            pts = np.asarray(points, dtype=np.float64)
        except (ValueError, TypeError) as exc:
            raise InputError(f"points are not a rectangular numeric array: {exc}")
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise InputError(f"points must form a 2-d array, got shape {pts.shape}")
        if pts.shape[0] == 0:
            raise InputError("point cloud must contain at least one point")
        if pts.shape[1] == 0:
            raise InputError("ambient dimension must be at least 1")
        if not np.all(np.isfinite(pts)):
            raise InputError("all coordinates must be finite")
        pts = np.ascontiguousarray(pts)
        pts.flags.writeable = False
        self.points = pts

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"PointCloud(n={self.n}, ambient_dim={self.ambient_dim})"


class DistanceSpec:
    """Base class for distance oracles. Subclasses implement ``one_to_many``."""

    @property
    def weak_triangle_const(self) -> float:
        raise NotImplementedError

    def one_to_many(self, a, pts, out=None):
        """Distances from point ``a`` to every row of ``pts`` (m, d)."""
        raise NotImplementedError

    def pairs(self, lhs, rhs):
        """Row-wise distances between two (m, d) arrays."""
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError


def _check_dims(a, pts):
    if a.shape[-1] != pts.shape[-1]:
        raise InputError(
            f"dimension mismatch: point has {a.shape[-1]} coordinates, "
            f"cloud has {pts.shape[-1]}"
        )


@dataclass(frozen=True)
class Lp(DistanceSpec):
    """Minkowski metric (sum |a_i - b_i|^p)^(1/p) for p >= 1."""

    p: float = 2.0

    def __post_init__(self):
        if not (np.isfinite(self.p) and self.p >= 1.0):
            raise InputError(f"Lp requires p >= 1, got {self.p}")

    @property
    def weak_triangle_const(self) -> float:
        return 1.0

    def one_to_many(self, a, pts, out=None):
        a = np.asarray(a, dtype=np.float64)
        pts = np.asarray(pts, dtype=np.float64)
        _check_dims(a, pts)
        m, d = pts.shape
        if out is None:
            out = np.empty(m)
        if self.p == 2.0:
            np.subtract(pts[:, 0], a[0], out=out)
            np.multiply(out, out, out=out)
            if d > 1:
                tmp = np.empty(m)
                for k in range(1, d):
                    np.subtract(pts[:, k], a[k], out=tmp)
                    np.multiply(tmp, tmp, out=tmp)
                    np.add(out, tmp, out=out)
            np.sqrt(out, out=out)
            return out
        if self.p == 1.0:
            np.subtract(pts[:, 0], a[0], out=out)
            np.abs(out, out=out)
            if d > 1:
                tmp = np.empty(m)
                for k in range(1, d):
                    np.subtract(pts[:, k], a[k], out=tmp)
                    np.abs(tmp, out=tmp)
                    np.add(out, tmp, out=out)
            return out
        np.subtract(pts[:, 0], a[0], out=out)
        np.abs(out, out=out)
        np.power(out, self.p, out=out)
        if d > 1:
            tmp = np.empty(m)
            for k in range(1, d):
                np.subtract(pts[:, k], a[k], out=tmp)
                np.abs(tmp, out=tmp)
                np.power(tmp, self.p, out=tmp)
                np.add(out, tmp, out=out)
        np.power(out, 1.0 / self.p, out=out)
        return out

    def pairs(self, lhs, rhs):
        lhs = np.asarray(lhs, dtype=np.float64)
        rhs = np.asarray(rhs, dtype=np.float64)
        if lhs.shape != rhs.shape:
            raise InputError("pairs requires arrays of identical shape")
        diff = np.abs(lhs - rhs)
        if self.p == 2.0:
            return np.sqrt((diff * diff).sum(axis=-1))
        if self.p == 1.0:
            return diff.sum(axis=-1)
        return (diff**self.p).sum(axis=-1) ** (1.0 / self.p)

    def describe(self) -> str:
        if self.p == 2.0:
            return "l2"
        if self.p == 1.0:
            return "l1"
        return f"lp:{format_float(self.p)}"


@dataclass(frozen=True)
class Snowflake(DistanceSpec):
    """theta-th power of a base distance, 0 < theta <= 1."""

    base: DistanceSpec
    theta: float

    def __post_init__(self):
        if not (0.0 < self.theta <= 1.0):
            raise InputError(f"Snowflake requires theta in (0, 1], got {self.theta}")

    @property
    def weak_triangle_const(self) -> float:
        # (C (a+b))^theta <= C^theta (a^theta + b^theta) since theta <= 1
        return self.base.weak_triangle_const**self.theta

    def one_to_many(self, a, pts, out=None):
        d = self.base.one_to_many(a, pts, out)
        np.power(d, self.theta, out=d)
        return d

    def pairs(self, lhs, rhs):
        return self.base.pairs(lhs, rhs) ** self.theta

    def describe(self) -> str:
        return f"snowflake:{format_float(self.theta)}({self.base.describe()})"


@dataclass(frozen=True)
class PowerQuasi(DistanceSpec):
    """p-th power of a base distance, p >= 1. A quasi-metric for p > 1."""

    base: DistanceSpec
    p: float

    def __post_init__(self):
        if not (np.isfinite(self.p) and self.p >= 1.0):
            raise InputError(f"PowerQuasi requires p >= 1, got {self.p}")

    @property
    def weak_triangle_const(self) -> float:
        # (C(a+b))^p <= C^p 2^(p-1) (a^p + b^p) by convexity of t^p
        return self.base.weak_triangle_const**self.p * 2.0 ** (self.p - 1.0)

    def one_to_many(self, a, pts, out=None):
        d = self.base.one_to_many(a, pts, out)
        np.power(d, self.p, out=d)
        return d

    def pairs(self, lhs, rhs):
        return self.base.pairs(lhs, rhs) ** self.p

    def describe(self) -> str:
        return f"powerquasi:{format_float(self.p)}({self.base.describe()})"


@dataclass(frozen=True)
class Scaled(DistanceSpec):
    """Base distance divided by a positive constant (unit-diameter views)."""

    base: DistanceSpec
    divisor: float

    def __post_init__(self):
        if not (np.isfinite(self.divisor) and self.divisor > 0.0):
            raise InputError(f"Scaled requires a positive divisor, got {self.divisor}")

    @property
    def weak_triangle_const(self) -> float:
        return self.base.weak_triangle_const

    def one_to_many(self, a, pts, out=None):
        d = self.base.one_to_many(a, pts, out)
        np.divide(d, self.divisor, out=d)
        return d

    def pairs(self, lhs, rhs):
        return self.base.pairs(lhs, rhs) / self.divisor

    def describe(self) -> str:
        return f"scaled:{format_float(self.divisor)}({self.base.describe()})"


def distance(spec: DistanceSpec, a, b) -> float:
    """Distance between two points under ``spec``.

    Deterministic and exactly symmetric; zero iff the points coincide
    (in exact arithmetic on the inputs).
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise InputError(
            f"dimension mismatch: {a.shape[0]} vs {b.shape[0]} coordinates"
        )
    return float(spec.one_to_many(a, b.reshape(1, -1))[0])


def diameter(cloud: PointCloud, spec: DistanceSpec) -> float:
    """Maximum pairwise distance, by a row-wise scan (O(n^2) evaluations)."""
    pts = cloud.points
    best = 0.0
    for i in range(cloud.n - 1):
        row = spec.one_to_many(pts[i], pts[i + 1 :])
        m = float(row.max())
        if m > best:
            best = m
    return best


@dataclass
class QuasiMetricReport:
    spec: str
    weak_triangle_const: float
    trials: int
    max_ratio: float
    witness: tuple[int, int, int] | None
    passed: bool

    def summary_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} weak-triangle {self.spec}: max ratio "
            f"{self.max_ratio:.6g} vs declared constant {self.weak_triangle_const:.6g}"
            f" (witness triple {self.witness})"
        )


def validate_quasi_metric(
    spec: DistanceSpec, cloud: PointCloud, trials: int, seed: int
) -> QuasiMetricReport:
    """Sample random triples and compare d(x,y)/(d(x,z)+d(z,y)) against the
    declared weak-triangle constant (relative tolerance 1e-9).

    The declared constant is analytic, derived from the distance kind;
    sampling can only falsify it, so a PASS means "not contradicted at this
    sample size".
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    if cloud.n < 3:
        raise InputError("quasi-metric validation needs at least 3 points")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, cloud.n, size=(trials, 3))
    pts = cloud.points
    x, y, z = pts[idx[:, 0]], pts[idx[:, 1]], pts[idx[:, 2]]
    num = spec.pairs(x, y)
    den = spec.pairs(x, z) + spec.pairs(z, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(num == 0.0, 0.0, num / den)
    ratio = np.where((den == 0.0) & (num > 0.0), np.inf, ratio)
    k = int(np.argmax(ratio))
    max_ratio = float(ratio[k])
    c_w = spec.weak_triangle_const
    return QuasiMetricReport(
        spec=spec.describe(),
        weak_triangle_const=c_w,
        trials=trials,
        max_ratio=max_ratio,
        witness=(int(idx[k, 0]), int(idx[k, 1]), int(idx[k, 2])),
        passed=max_ratio <= c_w * (1.0 + 1e-9),
    )


@dataclass
class RescaledSpace:
    """A cloud/spec pair whose diameter is 1, plus the applied scale factor.

    For coordinate metrics (``Lp``) the rescaling divides coordinates; for
    every other kind the oracle output is divided instead, leaving the
    coordinates untouched.
    """

    cloud: PointCloud
    spec: DistanceSpec
    scale: float


def rescale_to_unit_diameter(cloud: PointCloud, spec: DistanceSpec) -> RescaledSpace:
    if cloud.n < 2:
        raise DegenerateInputError("rescaling needs at least 2 points")
    diam = diameter(cloud, spec)
    if diam == 0.0:
        raise DegenerateInputError("all points coincide, diameter is zero")
    if isinstance(spec, Lp):
        return RescaledSpace(PointCloud(cloud.points / diam), spec, diam)
    return RescaledSpace(cloud, Scaled(spec, diam), diam)


def spec_from_string(text: str) -> DistanceSpec:
    """Parse the CLI metric notation.

    Accepted forms: ``l2``, ``l1``, ``lp:<p>``, ``snowflake:<theta>``
    (base l2), ``powerquasi:<p>`` (base l2).
    """
    text = text.strip().lower()
    if text == "l2":
        return Lp(2.0)
    if text == "l1":
        return Lp(1.0)
    kind, sep, arg = text.partition(":")
    if not sep:
        raise InputError(f"unknown metric {text!r}")
    try:
        value = float(arg)
    except ValueError:
        raise InputError(f"bad numeric parameter in metric {text!r}") from None
    if kind == "lp":
        return Lp(value)
    if kind == "snowflake":
        return Snowflake(Lp(2.0), value)
    if kind == "powerquasi":
        return PowerQuasi(Lp(2.0), value)
    raise InputError(f"unknown metric {text!r}")


def write_cloud(cloud: PointCloud, path) -> None:
    """Write the point-cloud text format: one point per line, coordinates as
    comma-separated decimals (17 significant digits), LF endings, no header.
    """
    lines = []
    for row in cloud.points:
        lines.append(",".join(format_float(float(v)) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def read_cloud(path) -> PointCloud:
    """Read the point-cloud text format, enforcing a uniform dimension.

    Malformed lines are reported with their 1-based line number.
    """
    rows = []
    dim = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                row = [float(part) for part in parts]
            except ValueError:
                raise InputError(f"{path}:{lineno}: malformed coordinate in {line!r}")
            if dim is None:
                dim = len(row)
            elif len(row) != dim:
                raise InputError(
                    f"{path}:{lineno}: expected {dim} coordinates, got {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise InputError(f"{path}: no points found")
    return PointCloud(np.array(rows, dtype=np.float64))
