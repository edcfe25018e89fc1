"""Hitting simulation, reduced functions, capacity, balayage, domination."""

import numpy as np
import pytest

from levylab.lyapunov import gaussian_norm
from levylab.measures import brownian_triplet
from levylab.operators import TestFunction
from levylab.potential import (
    PathConfig,
    PointCloud,
    PreconditionError,
    balayage_check,
    capacity,
    capacity_tightness_profile,
    coord_halfspace,
    coordinate_box,
    domination_check,
    e_ball,
    e_ball_complement,
    empty_set,
    horizon_bias_bound,
    level_crossing_times,
    multi_target_hit,
    polarity_diagnostic_H,
    polarity_diagnostic_point,
    projection_convergence,
    reduced_function,
    reduced_function_family,
    simulate_hit_batch,
    simulate_to_hit,
    slab_complement,
    whole_space,
)
from levylab.rng import substream
from levylab.space import build_growth_basis, canonical_x, make_space

ONE = TestFunction(lambda y: np.ones(y.shape[:-1]), bound=1.0, name="one")


@pytest.fixture(scope="module")
def setup():
    model = make_space(8)
    return model, brownian_triplet(model)


def test_path_config_validation():
    with pytest.raises(ValueError):
        PathConfig(dt=0.0, horizon=1.0)
    with pytest.raises(ValueError):
        PathConfig(dt=2.0, horizon=1.0)


def test_point_cloud_validation():
    with pytest.raises(ValueError):
        PointCloud(np.zeros((2, 4)), np.array([1.0]))
    with pytest.raises(ValueError):
        PointCloud(np.zeros((1, 4)), np.array([-1.0]))


def test_start_inside_target_hits_at_zero(setup):
    model, triplet = setup
    cfg = PathConfig(dt=0.1, horizon=1.0)
    rec = simulate_to_hit(
        triplet, np.zeros(8), e_ball(model, np.zeros(8), 1.0), cfg, substream(0)
    )
    assert rec.hit and rec.time == 0.0


def test_whole_space_immediate(setup):
    model, triplet = setup
    cfg = PathConfig(dt=0.1, horizon=1.0)
    rec = simulate_to_hit(triplet, np.ones(8), whole_space(model), cfg, substream(1))
    assert rec.hit and rec.time == 0.0


def test_no_hit_reports_inf(setup):
    model, triplet = setup
    cfg = PathConfig(dt=0.1, horizon=0.5)
    far = coord_halfspace(model, 1, 100.0, +1)
    rec = simulate_to_hit(triplet, np.zeros(8), far, cfg, substream(2))
    assert not rec.hit and rec.time == np.inf


def test_gamblers_ruin_exit_split(setup):
    """P(exit right of (a,b)) = (x - a)/(b - a) for the first coordinate."""
    model, triplet = setup
    a, b, x = -1.0, 2.0, 0.5
    start = np.zeros(8)
    start[0] = x
    cfg = PathConfig(dt=0.01, horizon=40.0)
    target = slab_complement(model, 1, a, b)
    hit, _, loc = simulate_hit_batch(triplet, start, target, cfg, 4000, substream(3))
    assert hit.mean() > 0.999
    from levylab.measures import McEstimate

    right = McEstimate.from_samples((loc[hit][:, 0] >= b).astype(float))
    assert right.verdict((x - a) / (b - a)) == "pass"


def test_reduced_function_whole_space(setup):
    model, triplet = setup
    cfg = PathConfig(dt=0.1, horizon=1.0)
    est = reduced_function(
        triplet, ONE, whole_space(model), 1.0, np.zeros(8), 200, cfg, substream(4)
    )
    assert est.mean == 1.0  # T = 0 under the D-convention


def test_reduced_function_beta_zero_guard(setup):
    model, triplet = setup
    cfg = PathConfig(dt=0.1, horizon=1.0)
    with pytest.raises(PreconditionError):
        reduced_function(
            triplet, ONE, whole_space(model), 0.0, np.zeros(8), 100, cfg, substream(5)
        )
    est = reduced_function(
        triplet,
        ONE,
        whole_space(model),
        0.0,
        np.zeros(8),
        100,
        cfg,
        substream(5),
        transient=True,
    )
    assert est.mean == 1.0


def test_reduced_function_bounds_and_monotone(setup):
    """0 <= estimate <= sup v, and nested targets order per sample."""
    model, triplet = setup
    cfg = PathConfig(dt=0.02, horizon=6.0)
    small = coord_halfspace(model, 1, 1.5, +1)
    big = coord_halfspace(model, 1, 0.5, +1)
    ests, samples = reduced_function_family(
        triplet, ONE, [small, big], 1.0, np.zeros(8), 1500, cfg, substream(6)
    )
    assert np.all(samples >= 0.0) and np.all(samples <= 1.0)
    # big contains small: hit no later, discounted value no smaller
    assert np.all(samples[1] >= samples[0] - 1e-12)
    assert ests[1].mean >= ests[0].mean


def test_multi_target_ordering(setup):
    model, triplet = setup
    cfg = PathConfig(dt=0.05, horizon=4.0)
    t1 = coord_halfspace(model, 1, 0.5, +1)
    t2 = coord_halfspace(model, 1, 1.5, +1)
    times, locs = multi_target_hit(
        triplet, np.zeros(8), [t1, t2], cfg, 500, substream(7)
    )
    assert np.all(times[0] <= times[1])


def test_horizon_bias_bound():
    cfg = PathConfig(dt=0.1, horizon=50.0)
    assert horizon_bias_bound(1.0, 1.0, cfg) == pytest.approx(np.exp(-50.0))


def test_capacity_trivial_sets(setup):
    model, triplet = setup
    cfg = PathConfig(dt=0.1, horizon=5.0)
    cloud = PointCloud(np.zeros((1, 8)), np.array([2.0]))
    beta = 1.5
    empty = capacity(triplet, cloud, empty_set(model), beta, 200, cfg, substream(8))
    assert empty.mean == 0.0
    whole = capacity(triplet, cloud, whole_space(model), beta, 200, cfg, substream(8))
    assert whole.mean == pytest.approx(2.0 / beta)
    assert whole.stderr < 1e-12  # constant samples up to float roundoff


def test_capacity_beta_validation(setup):
    model, triplet = setup
    cloud = PointCloud(np.zeros((1, 8)), np.array([1.0]))
    with pytest.raises(ValueError):
        capacity(
            triplet, cloud, whole_space(model), 0.0, 200,
            PathConfig(dt=0.1, horizon=1.0), substream(0),
        )


def test_capacity_tightness_decreasing(setup):
    model, triplet = setup
    growth_basis = build_growth_basis(model, canonical_x(model))
    norm = gaussian_norm(model, growth_basis)
    cfg = PathConfig(dt=0.05, horizon=15.0)
    cloud = PointCloud(np.zeros((1, 8)), np.array([1.0]))
    prof = capacity_tightness_profile(
        norm, triplet, cloud, [1.0, 2.0, 3.0], 1.0, 800, cfg, substream(9)
    )
    means = [p["estimate"].mean for p in prof]
    assert means[0] >= means[1] >= means[2]
    assert means[0] > 0.0


def test_level_crossing_monotone(setup):
    model, triplet = setup
    growth_basis = build_growth_basis(model, canonical_x(model))
    norm = gaussian_norm(model, growth_basis)
    cfg = PathConfig(dt=0.05, horizon=10.0)
    times = level_crossing_times(
        norm, triplet, np.zeros(8), [1.0, 2.0, 4.0], cfg, 300, substream(10)
    )
    assert np.all(times[0] <= times[1]) and np.all(times[1] <= times[2])


def test_balayage_atom_inside_M(setup):
    """Start inside open M: T = 0, swept measure equals the original."""
    model, triplet = setup
    M = coord_halfspace(model, 1, -1.0, +1)  # contains the origin
    nu = PointCloud(np.zeros((1, 8)), np.array([1.0]))
    F = coord_halfspace(model, 1, 0.5, +1)
    cfg = PathConfig(dt=0.05, horizon=6.0)
    rep = balayage_check(
        triplet, nu, M, 1.0,
        [{"target": F, "inside": True}], 400, cfg, substream(11),
    )
    assert rep["per_sample_inequality"]
    assert rep["carrier_ok"]
    row = rep["rows"][0]
    assert row["difference"].mean == 0.0
    assert row["verdict"] == "pass"


def test_balayage_atom_outside_M(setup):
    model, triplet = setup
    M = coord_halfspace(model, 1, 1.0, +1)
    nu = PointCloud(np.zeros((1, 8)), np.array([1.0]))
    F_in = coord_halfspace(model, 1, 1.5, +1)
    F_out = coord_halfspace(model, 1, -0.5, -1)
    cfg = PathConfig(dt=0.02, horizon=10.0)
    rep = balayage_check(
        triplet, nu, M, 1.0,
        [{"target": F_in, "inside": True}, {"target": F_out, "inside": False}],
        800, cfg, substream(12),
    )
    assert rep["per_sample_inequality"]
    assert rep["carrier_ok"]
    assert rep["rows"][0]["verdict"] == "pass"  # equality on F inside M
    assert rep["rows"][1]["verdict"] != "fail"  # one-sided off M


def test_balayage_degenerate_warning(setup):
    model, triplet = setup
    M = coord_halfspace(model, 1, 50.0, +1)  # unreachable
    nu = PointCloud(np.zeros((1, 8)), np.array([1.0]))
    cfg = PathConfig(dt=0.1, horizon=1.0)
    rep = balayage_check(
        triplet, nu, M, 1.0,
        [{"target": M, "inside": True}], 100, cfg, substream(13),
    )
    assert rep["degenerate"]


def test_domination_equal_measures_pass(setup):
    model, triplet = setup
    mu = PointCloud(np.zeros((1, 8)), np.array([1.0]))
    probes = [e_ball(model, np.zeros(8), 0.5), e_ball(model, np.ones(8) * 0.1, 0.4)]
    rep = domination_check(
        triplet, mu, mu, probes[:1], probes[1:], 1.0, 2000, substream(14)
    )
    assert rep["hypothesis_ok"]
    assert rep["conclusion_ok"]


def test_domination_negative_control(setup):
    """mu = 2 nu must fail the hypothesis gate."""
    model, triplet = setup
    nu = PointCloud(np.zeros((1, 8)), np.array([1.0]))
    mu = PointCloud(np.zeros((1, 8)), np.array([2.0]))
    probe = e_ball(model, np.zeros(8), 1.0)
    rep = domination_check(
        triplet, mu, nu, [probe], [probe], 1.0, 2000, substream(15)
    )
    assert not rep["hypothesis_ok"]
    assert rep["conclusion_ok"] is None


def test_polarity_point_requires_nondegenerate():
    from levylab.measures import LevyTriplet

    model = make_space(8)
    diag = np.zeros(8)
    diag[0] = 1.0
    degenerate = LevyTriplet(model, np.zeros(8), diag)
    with pytest.raises(PreconditionError):
        polarity_diagnostic_point(
            degenerate, np.zeros(8), [0.5, 0.25], [np.ones(8)],
            100, PathConfig(dt=0.1, horizon=1.0), substream(16),
        )


def test_polarity_point_trend(setup):
    """2-d shrinking-ball hit probabilities decrease with the radius."""
    model, triplet = setup
    y = np.zeros(8)
    start = np.zeros(8)
    start[0] = 1.0
    cfg = PathConfig(dt=0.01, horizon=2.0)
    rep = polarity_diagnostic_point(
        triplet, y, [0.6, 0.3, 0.1], [start], 1500, cfg, substream(17), n_coords=2
    )
    assert rep["verdict"] == "consistent with polarity"


def test_polarity_point_negative_control_1d(setup):
    """1-d projected motion keeps hitting small intervals: not polar."""
    model, triplet = setup
    y = np.zeros(8)
    start = np.zeros(8)
    start[0] = 0.5
    cfg = PathConfig(dt=0.01, horizon=4.0)
    rep = polarity_diagnostic_point(
        triplet, y, [0.4, 0.2, 0.1], [start], 1200, cfg, substream(18),
        n_coords=1, allow_degenerate=True,
    )
    assert rep["verdict"] == "not consistent"


def test_polarity_H_structural(setup):
    model, triplet = setup
    start = np.zeros(8)
    start[0] = 3.0
    cfg = PathConfig(dt=0.05, horizon=1.0)
    rep = polarity_diagnostic_H(
        triplet, [2.5, 1.5, 0.5], [start], 4000, cfg, substream(19)
    )
    assert rep["shrinking"]
    assert rep["structural"]["verdict"] == "pass"


def test_projection_convergence_gaussian(setup):
    model, triplet = setup
    rep = projection_convergence(triplet, 1.0, (2, 4, 8), 40_000, substream(20))
    assert rep["decreasing"]
    for row in rep["rows"]:
        assert row["verdict"] == "pass"
    # full projection leaves no tail
    assert rep["rows"][-1]["estimate"].mean == 0.0


def test_coordinate_box_membership():
    model = make_space(4)
    box = coordinate_box(model, np.array([0.0, 0.0]), np.array([1.0, 1.0]))
    assert bool(box(np.array([0.5, 0.5, 9.0, 9.0])))
    assert not bool(box(np.array([1.5, 0.5, 0.0, 0.0])))


def test_e_ball_complement_membership():
    model = make_space(4)
    shell = e_ball_complement(model, np.zeros(4), 1.0)
    assert not bool(shell(np.zeros(4)))
    far = np.zeros(4)
    far[0] = 10.0
    assert bool(shell(far))
