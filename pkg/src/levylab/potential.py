"""Path simulation, hitting times, reduced functions, capacity and balayage.

Paths are stepped on a fixed time grid; each increment is drawn exactly from
the increment law at the step size, so there is no Euler error, only the
discrete monitoring of the target.  For continuous triplets and
coordinate-aligned target faces a Brownian-bridge crossing draw removes most
of the monitoring bias; the residual is folded into test tolerances.

Hitting uses the D-convention: membership is checked at time 0, so a start
inside an open target hits immediately.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .measures import DEFAULT_CONFIDENCE, LevyTriplet, McEstimate, sample_increments
from .space import SpaceModel


class PreconditionError(ValueError):
    """The operation was called outside its stated hypotheses."""


@dataclass(frozen=True)
class PathConfig:
    dt: float = 0.01
    horizon: float = 50.0
    bridge: bool = True  # bridge-crossing draw on coordinate faces

    def __post_init__(self):
        if self.dt <= 0 or self.horizon <= 0 or self.dt > self.horizon:
            raise ValueError("need 0 < dt <= horizon")


@dataclass(frozen=True)
class TargetSet:
    """Membership predicate plus optional coordinate-aligned faces.

    A face (j, v, side) certifies that the target contains the halfspace
    side*(c_j - v) >= 0 locally, enabling the bridge crossing draw on
    coordinate j.
    """

    name: str
    membership: Callable[[np.ndarray], np.ndarray]
    faces: tuple = ()

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(self.membership(np.asarray(z, dtype=float)), dtype=bool)


@dataclass(frozen=True)
class HitRecord:
    hit: bool
    time: float  # inf when the horizon was reached without a hit
    location: np.ndarray


@dataclass(frozen=True)
class PointCloud:
    """Finite weighted point measure."""

    points: np.ndarray  # (k, N)
    masses: np.ndarray  # (k,)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        m = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if m.shape != (pts.shape[0],) or np.any(m < 0):
            raise ValueError("masses must be nonnegative, one per point")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", m)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())


# -- target constructors ----------------------------------------------------


def empty_set(model: SpaceModel) -> TargetSet:
    return TargetSet("empty", lambda z: np.zeros(z.shape[:-1], dtype=bool))


def whole_space(model: SpaceModel) -> TargetSet:
    return TargetSet("whole", lambda z: np.ones(z.shape[:-1], dtype=bool))


def e_ball(model: SpaceModel, center: np.ndarray, radius: float) -> TargetSet:
    c = np.asarray(center, dtype=float)
    return TargetSet(
        f"e_ball(r={radius})",
        lambda z: model.e_norm2(z - c) <= radius * radius,
    )


def e_ball_complement(model: SpaceModel, center: np.ndarray, radius: float) -> TargetSet:
    c = np.asarray(center, dtype=float)
    return TargetSet(
        f"e_ball_complement(r={radius})",
        lambda z: model.e_norm2(z - c) > radius * radius,
    )


def coord_halfspace(model: SpaceModel, coord: int, level: float, side: int) -> TargetSet:
    """{z : side*(c_coord - level) >= 0}; coord is 1-based."""
    j = coord - 1
    return TargetSet(
        f"halfspace(c{coord}{'>=' if side > 0 else '<='}{level})",
        lambda z: side * (z[..., j] - level) >= 0,
        faces=((j, level, side),),
    )


def slab_complement(model: SpaceModel, coord: int, a: float, b: float) -> TargetSet:
    """Complement of the open slab a < c_coord < b."""
    j = coord - 1
    return TargetSet(
        f"slab_complement(c{coord} outside ({a},{b}))",
        lambda z: (z[..., j] <= a) | (z[..., j] >= b),
        faces=((j, a, -1), (j, b, +1)),
    )


def coordinate_box(model: SpaceModel, lows: np.ndarray, highs: np.ndarray) -> TargetSet:
    lo = np.asarray(lows, dtype=float)
    hi = np.asarray(highs, dtype=float)
    k = lo.size
    return TargetSet(
        "coordinate_box",
        lambda z: np.all((z[..., :k] >= lo) & (z[..., :k] <= hi), axis=-1),
    )


def coord_ball(model: SpaceModel, center: np.ndarray, radius: float, k: int) -> TargetSet:
    """Euclidean ball in the first k pairing coordinates."""
    c = np.asarray(center, dtype=float)[:k]
    return TargetSet(
        f"coord_ball(k={k}, r={radius})",
        lambda z: np.sum((z[..., :k] - c) ** 2, axis=-1) <= radius * radius,
    )


def h_ball(model: SpaceModel, radius: float) -> TargetSet:
    """Truncated H-norm ball around the origin."""
    return TargetSet(
        f"h_ball(r={radius})", lambda z: model.h_norm2(z) <= radius * radius
    )


def qx_levelset_complement(norm, level: float) -> TargetSet:
    from .lyapunov import q_x_eval

    return TargetSet(
        f"qx_above({level})", lambda z: q_x_eval(norm, z) > level
    )


# -- the stepping engine ----------------------------------------------------


def _bridge_cross(
    zpre: np.ndarray,
    znew: np.ndarray,
    m: np.ndarray,
    faces,
    gaussian_diag: np.ndarray,
    dt: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Sample within-step crossings of coordinate faces; snaps the crossing
    coordinate onto the face.  Mutates znew and m, returns m."""
    for j, v, side in faces:
        g = float(gaussian_diag[j])
        if g <= 0:
            continue
        rem = np.flatnonzero(~m)
        if rem.size == 0:
            break
        d0 = side * (v - zpre[rem, j])
        d1 = side * (v - znew[rem, j])
        ok = (d0 > 0) & (d1 > 0)
        p = np.zeros(rem.size)
        p[ok] = np.exp(-2.0 * d0[ok] * d1[ok] / (g * dt))
        crossed = rng.random(rem.size) < p
        if crossed.any():
            ci = rem[crossed]
            znew[ci, j] = v
            m[ci] = True
    return m


def simulate_hit_batch(
    triplet: LevyTriplet,
    start: np.ndarray,
    target: TargetSet,
    cfg: PathConfig,
    n_paths: int,
    rng: np.random.Generator,
    refine: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
):
    """Step n_paths trajectories from `start` until they enter the target or
    the horizon runs out.  Returns (hit mask, times, locations); non-hit
    rows carry time=inf and the final position.  A 2-d start gives each
    path its own origin (one row per path)."""
    start = np.asarray(start, dtype=float)
    if start.ndim == 2:
        if start.shape[0] != n_paths:
            raise ValueError("per-path starts must supply one row per path")
        z = start.copy()
    else:
        z = np.tile(start, (n_paths, 1))
    hit = target(z)
    time = np.where(hit, 0.0, np.inf)
    loc = z.copy()
    active = ~hit
    use_bridge = cfg.bridge and triplet.is_continuous and bool(target.faces)
    n_steps = int(np.ceil(cfg.horizon / cfg.dt))
    t = 0.0
    for _ in range(n_steps):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        zpre = z[idx]
        znew = zpre + sample_increments(triplet, cfg.dt, idx.size, rng)
        m = target(znew)
        if refine is not None and m.any():
            znew[m] = refine(zpre[m], znew[m])
        if use_bridge:
            m = _bridge_cross(
                zpre, znew, m, target.faces, triplet.gaussian_diag, cfg.dt, rng
            )
        t += cfg.dt
        z[idx] = znew
        newly = idx[m]
        if newly.size:
            hit[newly] = True
            time[newly] = t
            loc[newly] = znew[m]
            active[newly] = False
    loc[~hit] = z[~hit]
    return hit, time, loc


def simulate_to_hit(
    triplet: LevyTriplet,
    start: np.ndarray,
    target: TargetSet,
    cfg: PathConfig,
    rng: np.random.Generator,
) -> HitRecord:
    hit, time, loc = simulate_hit_batch(triplet, start, target, cfg, 1, rng)
    return HitRecord(bool(hit[0]), float(time[0]), loc[0])


def multi_target_hit(
    triplet: LevyTriplet,
    start: np.ndarray,
    targets,
    cfg: PathConfig,
    n_paths: int,
    rng: np.random.Generator,
):
    """First hit times and locations of several targets along one common
    trajectory per path.  Returns (times (nT, n), locations (nT, n, N)).

    Sharing the trajectory turns set inclusions into per-sample time
    orderings: if one target contains another, it is hit no later, path by
    path.  No bridge correction (membership on the grid only), so all
    targets are monitored identically."""
    start = np.asarray(start, dtype=float)
    z = np.tile(start, (n_paths, 1))
    nT = len(targets)
    times = np.full((nT, n_paths), np.inf)
    locs = np.tile(start, (nT, n_paths, 1))
    for ti, tgt in enumerate(targets):
        hit0 = tgt(z)
        times[ti, hit0] = 0.0
    n_steps = int(np.ceil(cfg.horizon / cfg.dt))
    t = 0.0
    for _ in range(n_steps):
        if not np.isinf(times).any():
            break
        z += sample_increments(triplet, cfg.dt, n_paths, rng)
        t += cfg.dt
        for ti, tgt in enumerate(targets):
            fresh = np.isinf(times[ti]) & tgt(z)
            if fresh.any():
                times[ti, fresh] = t
                locs[ti, fresh] = z[fresh]
    return times, locs


def reduced_function_family(
    triplet: LevyTriplet,
    v,
    targets,
    beta: float,
    z: np.ndarray,
    n: int,
    cfg: PathConfig,
    rng: np.random.Generator,
    confidence: float = DEFAULT_CONFIDENCE,
):
    """Reduced-function estimates for several targets on common paths.

    Returns (list of McEstimate, per-path sample matrix (nT, n)); the
    sample matrix lets callers assert per-sample orderings for nested
    targets."""
    times, locs = multi_target_hit(triplet, z, targets, cfg, n, rng)
    nT = len(targets)
    samples = np.zeros((nT, n))
    for ti in range(nT):
        hit = np.isfinite(times[ti])
        if hit.any():
            samples[ti, hit] = np.exp(-beta * times[ti, hit]) * np.asarray(
                v(locs[ti, hit]), dtype=float
            )
    ests = [McEstimate.from_samples(samples[ti], confidence) for ti in range(nT)]
    return ests, samples


def level_crossing_times(
    norm,
    triplet: LevyTriplet,
    start: np.ndarray,
    levels,
    cfg: PathConfig,
    n_paths: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """First times at which q_x(X_t) exceeds each level, on shared paths.

    Returns an array (n_levels, n_paths) of times (inf when never).  Shared
    paths make the times nondecreasing across nested levels per path.
    """
    from .lyapunov import q_x_eval

    levels = np.asarray(levels, dtype=float)
    z = np.tile(np.asarray(start, dtype=float), (n_paths, 1))
    times = np.full((levels.size, n_paths), np.inf)
    q0 = q_x_eval(norm, z)
    for li, lv in enumerate(levels):
        times[li, q0 > lv] = 0.0
    n_steps = int(np.ceil(cfg.horizon / cfg.dt))
    t = 0.0
    for _ in range(n_steps):
        pending = np.isinf(times).any(axis=0)
        if not pending.any():
            break
        z += sample_increments(triplet, cfg.dt, n_paths, rng)
        t += cfg.dt
        q = q_x_eval(norm, z)
        for li, lv in enumerate(levels):
            fresh = np.isinf(times[li]) & (q > lv)
            times[li, fresh] = t
    return times


def discounted_occupancy(
    triplet: LevyTriplet,
    start: np.ndarray,
    M: TargetSet,
    F_targets,
    beta: float,
    cfg: PathConfig,
    n_paths: int,
    rng: np.random.Generator,
):
    """Per-path grid approximations of the discounted occupancies

        A_F = int_0^inf e^{-beta t} 1_F(X_t) dt        (full path)
        B_F = int_{T_M}^inf e^{-beta t} 1_F(X_t) dt    (after hitting M)

    along one common trajectory per path (the strong-Markov route to the
    balayage comparison: B_F <= A_F per path, with equality when F lies in
    M).  Returns (T_M array, A matrix, B matrix, hit locations)."""
    start = np.asarray(start, dtype=float)
    z = np.tile(start, (n_paths, 1))
    T = np.where(M(z), 0.0, np.inf)
    loc = z.copy()
    nF = len(F_targets)
    A = np.zeros((nF, n_paths))
    B = np.zeros((nF, n_paths))
    n_steps = int(np.ceil(cfg.horizon / cfg.dt))
    t = 0.0
    for _ in range(n_steps):
        z += sample_increments(triplet, cfg.dt, n_paths, rng)
        t += cfg.dt
        fresh = np.isinf(T) & M(z)
        if fresh.any():
            T[fresh] = t
            loc[fresh] = z[fresh]
        w = np.exp(-beta * t) * cfg.dt
        after = t >= T
        for fi, F in enumerate(F_targets):
            inF = F(z)
            A[fi] += w * inF
            B[fi] += w * (inF & after)
    return T, A, B, loc


# -- potential-theoretic operations ----------------------------------------


def horizon_bias_bound(sup_v: float, beta: float, cfg: PathConfig) -> float:
    """Truncation error certificate ||v|| e^{-beta*horizon}."""
    return sup_v * float(np.exp(-beta * cfg.horizon))


def reduced_function(
    triplet: LevyTriplet,
    v,
    M: TargetSet,
    beta: float,
    z: np.ndarray,
    n: int,
    cfg: PathConfig,
    rng: np.random.Generator,
    transient: bool = False,
    confidence: float = DEFAULT_CONFIDENCE,
) -> McEstimate:
    """Hitting-kernel estimate E[e^{-beta T} v(X_T); T < horizon]."""
    if beta <= 0 and not transient:
        raise PreconditionError(
            "beta = 0 requires a transience certificate (transient=True)"
        )
    hit, time, loc = simulate_hit_batch(triplet, z, M, cfg, n, rng)
    vals = np.zeros(n)
    if hit.any():
        vals[hit] = np.exp(-beta * time[hit]) * np.asarray(v(loc[hit]), dtype=float)
    return McEstimate.from_samples(vals, confidence)


def capacity(
    triplet: LevyTriplet,
    lam: PointCloud,
    M: TargetSet,
    beta: float,
    n: int,
    cfg: PathConfig,
    rng: np.random.Generator,
    confidence: float = DEFAULT_CONFIDENCE,
) -> McEstimate:
    """c_lambda(M) with the bounded potential p = U_beta 1 = 1/beta:

        c_lambda(M) = (1/beta) sum_i m_i E[e^{-beta T_M} ; hit from z_i].
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if M.name == "empty":
        return McEstimate(0.0, 0.0, n, confidence)
    mean = 0.0
    var = 0.0
    total = 0
    for zi, mi in zip(lam.points, lam.masses):
        hit, time, _ = simulate_hit_batch(triplet, zi, M, cfg, n, rng)
        vals = np.where(hit, np.exp(-beta * np.where(hit, time, 0.0)), 0.0) / beta
        est = McEstimate.from_samples(vals, confidence)
        mean += mi * est.mean
        var += (mi * est.stderr) ** 2
        total += n
    return McEstimate(mean, float(np.sqrt(var)), total, confidence)


def capacity_tightness_profile(
    norm,
    triplet: LevyTriplet,
    lam: PointCloud,
    levels,
    beta: float,
    n: int,
    cfg: PathConfig,
    rng: np.random.Generator,
    confidence: float = DEFAULT_CONFIDENCE,
):
    """c_lambda of the complements of nested q_x level sets, on common paths.

    Shared paths make the per-path discount factors nonincreasing across
    levels, so the strict-decrease trend is structural up to ties."""
    results = []
    levels = list(levels)
    means = np.zeros(len(levels))
    var = np.zeros(len(levels))
    for zi, mi in zip(lam.points, lam.masses):
        times = level_crossing_times(norm, triplet, zi, levels, cfg, n, rng)
        disc = np.where(np.isfinite(times), np.exp(-beta * times), 0.0) / beta
        for li in range(len(levels)):
            est = McEstimate.from_samples(disc[li], confidence)
            means[li] += mi * est.mean
            var[li] += (mi * est.stderr) ** 2
    for li, lv in enumerate(levels):
        results.append(
            {
                "level": lv,
                "estimate": McEstimate(
                    float(means[li]), float(np.sqrt(var[li])), n, confidence
                ),
            }
        )
    return results


def balayage_check(
    triplet: LevyTriplet,
    nu: PointCloud,
    M: TargetSet,
    beta: float,
    F_specs,
    n: int,
    cfg: PathConfig,
    rng: np.random.Generator,
    confidence: float = DEFAULT_CONFIDENCE,
) -> dict:
    """Compare nu_M o U_beta with nu o U_beta on probe sets F.

    F_specs is a list of {"target": TargetSet, "inside": bool} where inside
    certifies F subset M.  One common trajectory per sample carries both
    sides: the post-hitting occupancy never exceeds the full occupancy per
    path, and for F inside M the pre-hitting occupancy vanishes exactly.
    Also checks the carrier property of the sampled hitting locations.
    """
    targets = [spec["target"] for spec in F_specs]
    nF = len(targets)
    rows = [
        {
            "F": spec["target"].name,
            "inside": bool(spec["inside"]),
            "nu_side": 0.0,
            "swept_side": 0.0,
            "var_diff": 0.0,
        }
        for spec in F_specs
    ]
    per_sample_ineq = True
    any_hit = False
    carrier_ok = True
    for zi, mi in zip(nu.points, nu.masses):
        T, A, B, loc = discounted_occupancy(
            triplet, zi, M, targets, beta, cfg, n, rng
        )
        hits = np.isfinite(T)
        if hits.any():
            any_hit = True
            carrier_ok &= bool(np.all(M(loc[hits])))
        per_sample_ineq &= bool(np.all(B <= A + 1e-12))
        for fi in range(nF):
            diff = A[fi] - B[fi]
            rows[fi]["nu_side"] += mi * float(A[fi].mean())
            rows[fi]["swept_side"] += mi * float(B[fi].mean())
            rows[fi]["var_diff"] += (mi * diff.std(ddof=1) / np.sqrt(n)) ** 2
    for row in rows:
        diff_est = McEstimate(
            row["nu_side"] - row["swept_side"],
            float(np.sqrt(row.pop("var_diff"))),
            n,
            confidence,
        )
        if row["inside"]:
            row["verdict"] = diff_est.verdict(0.0)
        else:
            row["verdict"] = diff_est.verdict_at_least(0.0)
        row["difference"] = diff_est
    return {
        "rows": rows,
        "per_sample_inequality": per_sample_ineq,
        "carrier_ok": carrier_ok,
        "degenerate": not any_hit,
    }


def domination_check(
    triplet: LevyTriplet,
    mu: PointCloud,
    nu: PointCloud,
    probes_in_G,
    probes_out_G,
    beta: float,
    n: int,
    rng: np.random.Generator,
    confidence: float = DEFAULT_CONFIDENCE,
) -> dict:
    """Domination principle: verify mu o U_beta <= nu o U_beta on probes in
    the carrier G, then test the conclusion on probes outside G.

    Each probe shares one batch of resolvent increments across every cloud
    point of both measures (common random numbers)."""

    def probe_row(B: TargetSet):
        t = rng.exponential(1.0 / beta, size=n)
        incr = sample_increments(triplet, t, n, rng)
        mu_samples = np.zeros(n)
        for zi, mi in zip(mu.points, mu.masses):
            mu_samples += mi * B(zi + incr) / beta
        nu_samples = np.zeros(n)
        for zi, mi in zip(nu.points, nu.masses):
            nu_samples += mi * B(zi + incr) / beta
        diff = McEstimate.from_samples(nu_samples - mu_samples, confidence)
        return {
            "probe": B.name,
            "mu_value": float(mu_samples.mean()),
            "nu_value": float(nu_samples.mean()),
            "difference": diff,
            "verdict": diff.verdict_at_least(0.0),
        }

    hyp_rows = [probe_row(B) for B in probes_in_G]
    hypothesis_ok = all(r["verdict"] != "fail" for r in hyp_rows)
    out = {"hypothesis_rows": hyp_rows, "hypothesis_ok": hypothesis_ok}
    if not hypothesis_ok:
        out["conclusion_rows"] = []
        out["conclusion_ok"] = None
        out["note"] = "hypothesis not satisfied on G; conclusion skipped"
        return out
    conc_rows = [probe_row(B) for B in probes_out_G]
    out["conclusion_rows"] = conc_rows
    out["conclusion_ok"] = all(r["verdict"] != "fail" for r in conc_rows)
    return out


def polarity_diagnostic_point(
    triplet: LevyTriplet,
    y: np.ndarray,
    r_grid,
    starts,
    n: int,
    cfg: PathConfig,
    rng: np.random.Generator,
    n_coords: int | None = None,
    allow_degenerate: bool = False,
    confidence: float = DEFAULT_CONFIDENCE,
) -> dict:
    """Shrinking-ball hit probabilities around the point y.

    A diagnostic, not a proof: verdict "consistent with polarity" when the
    probabilities decrease toward 0 with the radius at every start.  The
    hypothesis surrogate requires a Gaussian part nondegenerate in at least
    two truncated coordinates unless allow_degenerate is set (the 1-d
    negative control)."""
    model = triplet.model
    if not allow_degenerate and int(np.count_nonzero(triplet.gaussian_diag)) < 2:
        raise PreconditionError(
            "Gaussian part must be nondegenerate in >= 2 coordinates"
        )
    r_grid = sorted(r_grid, reverse=True)
    rows = []
    consistent = True
    from .measures import z_value

    for start in starts:
        ests = []
        for r in r_grid:
            tgt = (
                e_ball(model, y, r)
                if n_coords is None
                else coord_ball(model, y, r, n_coords)
            )
            hit, _, _ = simulate_hit_batch(triplet, start, tgt, cfg, n, rng)
            est = McEstimate.from_samples(hit.astype(float), confidence)
            ests.append(est)
            rows.append({"start": np.asarray(start), "r": r, "estimate": est})
        zc = z_value(confidence)
        monotone = all(
            ests[i + 1].mean
            <= ests[i].mean + 3 * zc * np.hypot(ests[i].stderr, ests[i + 1].stderr)
            for i in range(len(ests) - 1)
        )
        shrinking = ests[-1].mean <= 0.5 * ests[0].mean + 3 * zc * np.hypot(
            ests[0].stderr, ests[-1].stderr
        )
        consistent &= monotone and shrinking
    return {
        "rows": rows,
        "verdict": "consistent with polarity" if consistent else "not consistent",
        "note": "shrinking-target diagnostic, not a proof",
    }


def polarity_diagnostic_H(
    triplet: LevyTriplet,
    rho_grid,
    starts,
    n: int,
    cfg: PathConfig,
    rng: np.random.Generator,
    t_structural: float = 1.0,
    confidence: float = DEFAULT_CONFIDENCE,
) -> dict:
    """Diagnostics for polarity of the Cameron-Martin space H.

    (a) hit probabilities of truncated H-balls shrink with the radius;
    (b) structural moment check: for the pure unit-H Gaussian the truncated
        H-norm^2 at time t has mean |start|_H^2 + N*t (the measure-level
        fact behind the increment law not charging H).
    """
    model = triplet.model
    rho_grid = sorted(rho_grid, reverse=True)
    rows = []
    shrinks = True
    for start in starts:
        ests = []
        for rho in rho_grid:
            hit, _, _ = simulate_hit_batch(
                triplet, start, h_ball(model, rho), cfg, n, rng
            )
            est = McEstimate.from_samples(hit.astype(float), confidence)
            ests.append(est)
            rows.append({"start": np.asarray(start), "rho": rho, "estimate": est})
        shrinks &= all(
            ests[i + 1].mean <= ests[i].mean + 3 * np.hypot(ests[i].stderr, ests[i + 1].stderr)
            for i in range(len(ests) - 1)
        )
    out = {"hit_rows": rows, "shrinking": shrinks}
    if triplet.is_pure_unit_gaussian:
        start0 = np.asarray(starts[0], dtype=float)
        incr = sample_increments(triplet, t_structural, n, rng)
        est = McEstimate.from_samples(model.h_norm2(start0 + incr), confidence)
        target = float(model.h_norm2(start0)) + model.dim * t_structural
        out["structural"] = {
            "estimate": est,
            "target": target,
            "verdict": est.verdict(target),
        }
    return out


def projection_convergence(
    triplet: LevyTriplet,
    t: float,
    n_grid,
    samples: int,
    rng: np.random.Generator,
    confidence: float = DEFAULT_CONFIDENCE,
) -> dict:
    """Mean squared E-norm of the projection tail of the increment law.

    For the pure unit-H Gaussian case the closed form is t * sum_{k>n}
    lambda_k and each cell carries a pass/fail verdict; otherwise only the
    decreasing trend is reported."""
    model = triplet.model
    z = sample_increments(triplet, t, samples, rng)
    rows = []
    for ngrid in sorted(n_grid):
        tail = model.weights[ngrid:] * z[:, ngrid:] ** 2
        est = McEstimate.from_samples(tail.sum(axis=1), confidence)
        row = {"n": ngrid, "estimate": est}
        if triplet.is_pure_unit_gaussian:
            target = t * float(model.weights[ngrid:].sum())
            row["target"] = target
            row["verdict"] = est.verdict(target)
        rows.append(row)
    means = [r["estimate"].mean for r in rows]
    return {
        "rows": rows,
        "decreasing": all(means[i + 1] <= means[i] for i in range(len(means) - 1)),
    }
