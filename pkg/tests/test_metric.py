import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mstdim.errors import DegenerateInputError, InputError
from mstdim.metric import (
    Lp,
    PointCloud,
    PowerQuasi,
    Scaled,
    Snowflake,
    diameter,
    distance,
    read_cloud,
    rescale_to_unit_diameter,
    spec_from_string,
    validate_quasi_metric,
    write_cloud,
)

L2 = Lp(2.0)


# ---------------------------------------------------------------- distances


def test_pythagorean_triple():
    assert distance(L2, (0, 0), (3, 4)) == 5.0


def test_snowflake_quarter():
    spec = Snowflake(Lp(1.0), 0.5)
    assert distance(spec, (0.0,), (0.25,)) == 0.5


def test_powerquasi_squares_distance():
    spec = PowerQuasi(L2, 2.0)
    assert distance(spec, (0.0,), (2.0,)) == 4.0


def test_distance_dimension_mismatch():
    with pytest.raises(InputError):
        distance(L2, (0, 0), (1, 2, 3))


def test_distance_zero_iff_equal():
    assert distance(L2, (0.3, 0.7), (0.3, 0.7)) == 0.0
    assert distance(L2, (0.3, 0.7), (0.3, 0.70001)) > 0.0


def test_parameter_validation():
    with pytest.raises(InputError):
        Lp(0.5)
    with pytest.raises(InputError):
        Snowflake(L2, 0.0)
    with pytest.raises(InputError):
        Snowflake(L2, 1.5)
    with pytest.raises(InputError):
        PowerQuasi(L2, 0.9)
    with pytest.raises(InputError):
        Scaled(L2, 0.0)


def test_weak_triangle_constants():
    assert L2.weak_triangle_const == 1.0
    assert Snowflake(L2, 0.5).weak_triangle_const == 1.0
    assert PowerQuasi(L2, 2.0).weak_triangle_const == 2.0
    assert PowerQuasi(L2, 3.0).weak_triangle_const == 4.0
    # composition: power of a snowflake keeps track of both factors
    assert PowerQuasi(Snowflake(L2, 0.5), 2.0).weak_triangle_const == 2.0


ALL_SPECS = [
    Lp(2.0),
    Lp(1.0),
    Lp(3.0),
    Snowflake(Lp(2.0), 0.5),
    Snowflake(Lp(1.0), 0.7),
    PowerQuasi(Lp(2.0), 2.0),
    PowerQuasi(Lp(2.0), 1.5),
    Scaled(Lp(2.0), 2.5),
]


@settings(deadline=None, max_examples=60)
@given(
    seed=st.integers(0, 10**6),
    spec_idx=st.integers(0, len(ALL_SPECS) - 1),
    d=st.integers(1, 4),
)
def test_distance_exactly_symmetric(seed, spec_idx, d):
    spec = ALL_SPECS[spec_idx]
    rng = np.random.default_rng(seed)
    a, b = rng.random(d), rng.random(d)
    assert distance(spec, a, b) == distance(spec, b, a)  # bit-identical


@settings(deadline=None, max_examples=40)
@given(seed=st.integers(0, 10**6), spec_idx=st.integers(0, len(ALL_SPECS) - 1))
def test_weak_triangle_never_exceeded(seed, spec_idx):
    spec = ALL_SPECS[spec_idx]
    rng = np.random.default_rng(seed)
    cloud = PointCloud(rng.random((30, 2)))
    report = validate_quasi_metric(spec, cloud, trials=300, seed=seed)
    assert report.max_ratio <= spec.weak_triangle_const * (1.0 + 1e-9)
    assert report.passed


# ------------------------------------------------------------ quasi-metric


def test_validate_l2_is_metric():
    rng = np.random.default_rng(0)
    cloud = PointCloud(rng.random((100, 2)))
    report = validate_quasi_metric(L2, cloud, trials=1000, seed=1)
    assert report.max_ratio <= 1.0 + 1e-9
    assert report.passed


def test_validate_powerquasi_tight_midpoint():
    # d(0,1)/(d(0,1/2)+d(1/2,1)) = 1/(1/4+1/4) = 2, exactly the declared constant
    cloud = PointCloud([[0.0], [0.5], [1.0]])
    spec = PowerQuasi(L2, 2.0)
    assert distance(spec, (0.0,), (1.0,)) / (
        distance(spec, (0.0,), (0.5,)) + distance(spec, (0.5,), (1.0,))
    ) == 2.0
    report = validate_quasi_metric(spec, cloud, trials=2000, seed=3)
    assert report.passed
    assert report.max_ratio == 2.0


def test_snowflake_is_metric_exhaustive_grid():
    # independent oracle: enumerate all triples of a 20-point grid and check
    # the triangle inequality for |x-y|^(1/2) directly
    xs = np.linspace(0.0, 1.0, 20)
    theta = 0.5
    worst = 0.0
    for x, y, z in itertools.product(xs, repeat=3):
        lhs = abs(x - y) ** theta
        rhs = abs(x - z) ** theta + abs(z - y) ** theta
        if rhs > 0:
            worst = max(worst, lhs / rhs)
    assert worst <= 1.0 + 1e-12

    spec = Snowflake(L2, theta)
    cloud = PointCloud(xs.reshape(-1, 1))
    report = validate_quasi_metric(spec, cloud, trials=4000, seed=5)
    assert report.passed
    assert report.max_ratio <= 1.0 + 1e-9


def test_validate_needs_three_points():
    with pytest.raises(InputError):
        validate_quasi_metric(L2, PointCloud([[0.0], [1.0]]), trials=10, seed=0)
    with pytest.raises(InputError):
        validate_quasi_metric(L2, PointCloud([[0.0], [0.5], [1.0]]), trials=0, seed=0)


# ---------------------------------------------------------------- rescaling


def test_rescale_halves_coordinates():
    cloud = PointCloud([[0.0, 0.0], [0.0, 2.0]])
    result = rescale_to_unit_diameter(cloud, L2)
    assert result.scale == 2.0
    assert np.array_equal(result.cloud.points, [[0.0, 0.0], [0.0, 1.0]])
    assert result.spec is L2


def test_rescale_identity_when_diameter_one():
    cloud = PointCloud([[0.0], [1.0]])
    result = rescale_to_unit_diameter(cloud, Lp(1.0))
    assert result.scale == 1.0
    assert np.array_equal(result.cloud.points, cloud.points)


def test_rescale_unit_square_corners():
    # oracle: direct max over all 6 pairs gives sqrt(2)
    corners = [[0, 0], [1, 0], [1, 1], [0, 1]]
    best = max(
        distance(L2, a, b) for a, b in itertools.combinations(corners, 2)
    )
    assert best == math.sqrt(2.0)
    result = rescale_to_unit_diameter(PointCloud(corners), L2)
    assert result.scale == best
    assert abs(diameter(result.cloud, result.spec) - 1.0) <= 1e-12


def test_rescale_non_coordinate_metric_wraps_oracle():
    cloud = PointCloud([[0.0], [0.25], [1.0]])
    spec = Snowflake(L2, 0.5)
    result = rescale_to_unit_diameter(cloud, spec)
    assert isinstance(result.spec, Scaled)
    assert result.cloud is cloud
    assert abs(diameter(result.cloud, result.spec) - 1.0) <= 1e-12
    assert result.scale == 1.0  # diameter of [0,1] under sqrt metric is 1


@settings(deadline=None, max_examples=25)
@given(seed=st.integers(0, 10**6), spec_idx=st.integers(0, len(ALL_SPECS) - 1))
def test_rescale_diameter_property(seed, spec_idx):
    spec = ALL_SPECS[spec_idx]
    rng = np.random.default_rng(seed)
    cloud = PointCloud(rng.random((20, 3)) * 5.0)
    result = rescale_to_unit_diameter(cloud, spec)
    assert abs(diameter(result.cloud, result.spec) - 1.0) <= 1e-12


def test_rescale_degenerate():
    with pytest.raises(DegenerateInputError):
        rescale_to_unit_diameter(PointCloud([[1.0, 2.0], [1.0, 2.0]]), L2)
    with pytest.raises(DegenerateInputError):
        rescale_to_unit_diameter(PointCloud([[1.0, 2.0]]), L2)


# --------------------------------------------------------------- PointCloud


def test_cloud_invariants():
    with pytest.raises(InputError):
        PointCloud(np.empty((0, 2)))
    with pytest.raises(InputError):
        PointCloud([[0.0, np.inf]])
    with pytest.raises(InputError):
        PointCloud([[0.0, np.nan]])
    cloud = PointCloud([[0.0, 1.0], [0.0, 1.0]])  # duplicates are legal
    assert cloud.n == 2 and cloud.ambient_dim == 2
    with pytest.raises(ValueError):
        cloud.points[0, 0] = 5.0  # immutable after construction


def test_cloud_1d_list_is_column():
    cloud = PointCloud([0.0, 0.5, 1.0])
    assert cloud.ambient_dim == 1 and cloud.n == 3


def test_cloud_rejects_ragged_and_non_numeric():
    with pytest.raises(InputError):
        PointCloud([[0.0, 1.0], [2.0]])
    with pytest.raises(InputError):
        PointCloud([["a", "b"]])


# ------------------------------------------------------------------ file IO


def test_cloud_roundtrip_bitwise(tmp_path):
    rng = np.random.default_rng(42)
    cloud = PointCloud(rng.random((50, 3)))
    path = tmp_path / "cloud.csv"
    write_cloud(cloud, path)
    back = read_cloud(path)
    assert np.array_equal(back.points, cloud.points)
    raw = path.read_bytes()
    assert b"\r" not in raw  # LF endings
    assert raw.decode().count("\n") == 50


def test_cloud_read_reports_line_numbers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0.0,1.0\n0.5,oops\n")
    with pytest.raises(InputError, match=":2:"):
        read_cloud(path)
    path.write_text("0.0,1.0\n0.5\n")
    with pytest.raises(InputError, match=":2:"):
        read_cloud(path)
    path.write_text("")
    with pytest.raises(InputError, match="no points"):
        read_cloud(path)


# ------------------------------------------------------------ spec parsing


def test_spec_from_string():
    assert spec_from_string("l2") == Lp(2.0)
    assert spec_from_string("l1") == Lp(1.0)
    assert spec_from_string("lp:2.5") == Lp(2.5)
    assert spec_from_string("snowflake:0.5") == Snowflake(Lp(2.0), 0.5)
    assert spec_from_string("powerquasi:2") == PowerQuasi(Lp(2.0), 2.0)
    with pytest.raises(InputError):
        spec_from_string("linf")
    with pytest.raises(InputError):
        spec_from_string("snowflake:abc")
