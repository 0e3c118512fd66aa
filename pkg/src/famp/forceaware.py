"""Force-aware extension: joint position+force models, conditioning, replanning.

A joint model stacks D position dimensions and F force dimensions in one
weight distribution, so its covariance carries temporal, inter-dimension,
and position-force correlations.  Conditioning observes selected dimensions
at one timestep through the corresponding rows of the basis matrix and
applies the standard Gaussian posterior update in weight space; because of
the cross-covariance, conditioning a force dimension also shifts the
position trajectory.

During execution the monitor compares measured to expected forces at every
control step.  When the summed absolute deviation exceeds the threshold it
selects the most-deviating force dimensions, conditions the current weight
distribution on the measured values slightly ahead of now, regenerates the
mean trajectory from the current robot state, and hands over smoothly by
sigmoid blending at a future mix time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    EmptySelectionError,
    EnvironmentFault,
    InsufficientDataError,
    NumericError,
    ReplanRejected,
    ShapeError,
)
from .mpcore import (
    BasisSystem,
    InitialState,
    TimeGrid,
    Trajectory,
    WeightDistribution,
    compose_mean,
    pointwise_std,
    symmetrize,
)


@dataclass(frozen=True)
class JointSpaceConfig:
    """Dimension bookkeeping for a joint position+force model.

    No relation between d_pos and f_force is assumed; force columns follow
    the position columns.
    """

    d_pos: int
    f_force: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.d_pos < 1 or self.f_force < 1:
            raise ConfigurationError("d_pos and f_force must each be >= 1")
        if self.labels is not None and len(self.labels) != self.n_dims:
            raise ConfigurationError("need one label per dimension")

    @property
    def n_dims(self) -> int:
        return self.d_pos + self.f_force

    def force_dim(self, f: int) -> int:
        """Full-space index of force dimension f."""
        if not 0 <= f < self.f_force:
            raise ShapeError(f"force dim {f} out of range")
        return self.d_pos + f


@dataclass(frozen=True)
class ForceMeasurement:
    """One force sample: time and an F-vector."""

    t: float
    tau: np.ndarray

    def __post_init__(self):
        tau = np.atleast_1d(np.asarray(self.tau, dtype=float))
        if not np.all(np.isfinite(tau)) or not math.isfinite(self.t):
            raise NumericError("force measurement contains non-finite values")
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)


@dataclass(frozen=True)
class ConditioningSpec:
    """Observation of selected dimensions at one timestep.

    t_cond snaps to the nearest grid step.  obs_noise is the observation
    variance, scalar or per selected dimension.
    """

    t_cond: float
    dims: tuple[int, ...]
    values: np.ndarray
    obs_noise: float | np.ndarray = 1e-6

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) == 0:
            raise ConfigurationError("conditioning dims must be non-empty")
        if len(set(dims)) != len(dims):
            raise ConfigurationError("conditioning dims must be unique")
        if any(d < 0 for d in dims):
            raise ConfigurationError("conditioning dims must be non-negative")
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if values.size != len(dims):
            raise ShapeError("one conditioning value per dim is required")
        if not np.all(np.isfinite(values)):
            raise NumericError("conditioning values must be finite")
        noise = np.atleast_1d(np.asarray(self.obs_noise, dtype=float))
        if noise.size == 1:
            noise = np.full(len(dims), float(noise[0]))
        if noise.size != len(dims) or np.any(noise < 0):
            raise ConfigurationError("obs_noise must be a scalar or per-dim vector >= 0")
        values.setflags(write=False)
        noise.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "obs_noise", noise)


@dataclass(frozen=True)
class ReplanConfig:
    """Trigger threshold and replanning behavior.

    delta is the force-deviation threshold; coverage_ratio the fraction of
    the total deviation the selected dimensions must cover; gamma the
    sigmoid steepness of the blend; mix_lead/cond_lead how far ahead of the
    trigger the handover and the conditioning observation are placed.
    """

    delta: float
    coverage_ratio: float = 0.5
    gamma: float = 20.0
    mix_lead: float = 0.25
    cond_lead: float = 0.1
    cooldown: float = 0.5
    obs_noise: float = 1e-4

    def __post_init__(self):
        if not (self.delta > 0):
            raise ConfigurationError("delta must be > 0")
        if not (0 < self.coverage_ratio <= 1):
            raise ConfigurationError("coverage_ratio must be in (0, 1]")
        if not (self.gamma > 0 and self.mix_lead > 0):
            raise ConfigurationError("gamma and mix_lead must be > 0")
        if self.cond_lead < 0 or self.cooldown < 0 or self.obs_noise < 0:
            raise ConfigurationError("cond_lead, cooldown, obs_noise must be >= 0")


@dataclass(frozen=True)
class ReplanEvent:
    """Record of one replanning decision."""

    t_trigger: float
    deviations: np.ndarray
    selected_dims: tuple[int, ...]
    conditioned_values: np.ndarray
    t_mix: float
    t_cond: float


@dataclass
class ExecutionLog:
    """Per-step record of one monitored episode plus its replan events."""

    t: np.ndarray
    desired_pos: np.ndarray
    actual_pos: np.ndarray
    expected_force: np.ndarray
    measured_force: np.ndarray
    expected_force_std: np.ndarray
    events: list[ReplanEvent] = field(default_factory=list)
    complete: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return self.t.shape[0]


def sigmoid(x) -> np.ndarray:
    """Numerically stable logistic function."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def assemble_joint_demos(pos_demos, force_demos) -> list[Trajectory]:
    """Column-concatenate matching position and force demonstrations."""
    pos_demos = list(pos_demos)
    force_demos = list(force_demos)
    if not pos_demos or not force_demos:
        raise InsufficientDataError("need at least one position and one force demo")
    if len(pos_demos) != len(force_demos):
        raise ShapeError(
            f"{len(pos_demos)} position demos vs {len(force_demos)} force demos"
        )
    joined = []
    for i, (p, f) in enumerate(zip(pos_demos, force_demos)):
        if p.grid != f.grid:
            raise ShapeError(f"demo {i}: position and force grids differ")
        joined.append(Trajectory(p.grid, np.hstack([p.values, f.values])))
    return joined


def _repair_psd(sigma: np.ndarray) -> np.ndarray:
    """Symmetrize and clip slightly negative eigenvalues from rounding."""
    sigma = symmetrize(sigma)
    eigvals, eigvecs = np.linalg.eigh(sigma)
    top = max(float(eigvals[-1]), 0.0)
    if eigvals[0] >= -1e-9 * max(top, 1e-300):
        return sigma
    eigvals = np.maximum(eigvals, 0.0)
    return symmetrize((eigvecs * eigvals) @ eigvecs.T)


def condition(wd: WeightDistribution, basis: BasisSystem, spec: ConditioningSpec,
              init: InitialState | None = None) -> WeightDistribution:
    """Gaussian posterior after observing selected dimensions at one step.

    The observation maps weights through the basis row at the conditioning
    step, restricted to the selected dimensions (all other rows of the
    per-step combination matrix are zeroed).  ``init`` supplies the
    homogeneous offset of the composed trajectory at that step; omit it for
    zero initial state.
    """
    nb1 = basis.n_weights_per_dim
    n_dims = wd.n_dims
    if wd.n_weights_per_dim != nb1:
        raise ShapeError("weight distribution does not match basis size")
    if any(d >= n_dims for d in spec.dims):
        raise ShapeError(f"conditioning dims {spec.dims} out of range for {n_dims} dims")
    if not -basis.grid.dt / 2 <= spec.t_cond <= basis.grid.duration + basis.grid.dt / 2:
        raise ConfigurationError(f"t_cond={spec.t_cond} outside the grid")
    if init is None:
        init = InitialState.zeros(n_dims)
    if init.n_dims != n_dims:
        raise ShapeError("initial state dimension does not match weight distribution")

    k = basis.grid.index_of(spec.t_cond)
    phi_row = basis.phi[k]
    m = len(spec.dims)
    ht = np.zeros((m, wd.mu_omega.size))
    for row, d in enumerate(spec.dims):
        ht[row, d * nb1:(d + 1) * nb1] = phi_row

    dims = np.array(spec.dims)
    homog = basis.xi1[k] * init.position[dims] + basis.xi2[k] * init.velocity[dims]
    innovation = spec.values - (ht @ wd.mu_omega + homog)

    cross = wd.sigma_omega @ ht.T  # (p, m)
    s = ht @ cross + np.diag(spec.obs_noise)
    try:
        chol = np.linalg.cholesky(symmetrize(s))
    except np.linalg.LinAlgError:
        raise NumericError(
            "innovation matrix is singular; condition with obs_noise > 0"
        ) from None
    # gain K = cross @ s^-1 via two triangular solves
    tmp = np.linalg.solve(chol, cross.T)
    gain = np.linalg.solve(chol.T, tmp).T

    mu_post = wd.mu_omega + gain @ innovation
    sigma_post = _repair_psd(wd.sigma_omega - gain @ cross.T)
    return WeightDistribution(mu_post, sigma_post, n_dims=n_dims,
                              sigma_n_sq=wd.sigma_n_sq)


def replan_trigger(expected, measured, delta: float):
    """Summed absolute force deviation against the strict threshold."""
    expected = np.atleast_1d(np.asarray(expected, dtype=float))
    measured = np.atleast_1d(np.asarray(measured, dtype=float))
    if expected.shape != measured.shape:
        raise ShapeError("expected and measured force lengths differ")
    deviations = np.abs(expected - measured)
    return bool(deviations.sum() > delta), deviations


def select_dims(deviations, coverage_ratio: float) -> list[int]:
    """Fewest force dimensions, by descending deviation, covering the ratio.

    Ties break toward the lower index.
    """
    deviations = np.atleast_1d(np.asarray(deviations, dtype=float))
    if np.any(deviations < 0):
        raise ConfigurationError("deviations must be non-negative")
    total = float(deviations.sum())
    if total == 0.0:
        raise EmptySelectionError("all deviations are zero; nothing to select")
    order = np.argsort(-deviations, kind="stable")
    needed = coverage_ratio * total
    covered = 0.0
    chosen: list[int] = []
    for idx in order:
        chosen.append(int(idx))
        covered += float(deviations[idx])
        if covered >= needed:
            break
    return chosen


def blend(lam_old: Trajectory, lam_cond: Trajectory, t_mix: float,
          gamma: float) -> Trajectory:
    """Sigmoid mixture handing over from the old to the new trajectory."""
    if lam_old.grid != lam_cond.grid:
        raise ShapeError("blend inputs use different grids")
    if lam_old.n_dims != lam_cond.n_dims:
        raise ShapeError("blend inputs have different dimension counts")
    u = gamma * (lam_old.grid.times() - t_mix)
    w_new = sigmoid(u)[:, None]
    w_old = sigmoid(-u)[:, None]
    return Trajectory(lam_old.grid, w_old * lam_old.values + w_new * lam_cond.values)


def reanchor_mean(basis: BasisSystem, omega: np.ndarray, init_base: InitialState,
                  k_now: int, state_pos: np.ndarray, state_vel: np.ndarray) -> Trajectory:
    """Mean trajectory re-anchored to pass through the current state.

    From step ``k_now`` onward the homogeneous responses (shifted to start
    at that step) absorb the gap between the composed mean and the actual
    state, so the regenerated trajectory starts at the current position and
    velocity.  For a static ("promp") basis there are no homogeneous terms
    and the composed mean is returned unchanged.
    """
    mean = compose_mean(basis, omega, init_base)
    if basis.kind != "prodmp":
        return mean
    values = mean.values.copy()
    n = values.shape[0]
    if not 0 <= k_now < n:
        raise ShapeError(f"k_now={k_now} outside the grid")
    vel = np.gradient(values, basis.grid.dt, axis=0)[k_now]
    dy = np.asarray(state_pos, dtype=float) - values[k_now]
    dv = np.asarray(state_vel, dtype=float) - vel
    span = n - k_now
    values[k_now:] += np.outer(basis.xi1[:span], dy) + np.outer(basis.xi2[:span], dv)
    return Trajectory(basis.grid, values)


def replan(wd_current: WeightDistribution, basis: BasisSystem,
           init_now: InitialState, t_now: float, measurement: ForceMeasurement,
           expected, cfg: ReplanConfig, *, init_base: InitialState | None = None,
           lam_old: Trajectory | None = None, last_replan_t: float | None = None):
    """Condition on deviating measured forces and blend in the new trajectory.

    init_now is the current robot state over all D+F dimensions (measured
    forces standing in as the force-dimension state); init_base is the
    anchor the running trajectory was composed from.  Returns the posterior
    weight distribution, the blended desired trajectory, and the event.
    """
    expected = np.atleast_1d(np.asarray(expected, dtype=float))
    f_force = measurement.tau.size
    n_dims = wd_current.n_dims
    d_pos = n_dims - f_force
    if d_pos < 1:
        raise ShapeError("measurement has as many dims as the full model")
    if init_now.n_dims != n_dims:
        raise ShapeError("init_now must cover all position and force dimensions")
    if last_replan_t is not None and (t_now - last_replan_t) < cfg.cooldown:
        raise ReplanRejected(
            f"replan at t={t_now:.3f} within cooldown of t={last_replan_t:.3f}"
        )
    triggered, deviations = replan_trigger(expected, measurement.tau, cfg.delta)
    if not triggered:
        raise ReplanRejected("replan called without an active trigger")

    if init_base is None:
        init_base = InitialState.zeros(n_dims)
    force_dims = select_dims(deviations, cfg.coverage_ratio)
    values = measurement.tau[force_dims]
    t_cond = min(t_now + cfg.cond_lead, basis.grid.duration)
    spec = ConditioningSpec(
        t_cond=t_cond,
        dims=tuple(d_pos + f for f in force_dims),
        values=values,
        obs_noise=cfg.obs_noise,
    )
    wd_new = condition(wd_current, basis, spec, init=init_base)

    k_now = basis.grid.index_of(t_now)
    lam_cond = reanchor_mean(basis, wd_new.mu_omega, init_base, k_now,
                             init_now.position, init_now.velocity)
    if lam_old is None:
        lam_old = compose_mean(basis, wd_current.mu_omega, init_base)
    t_mix = t_now + cfg.mix_lead
    lam_des = blend(lam_old, lam_cond, t_mix, cfg.gamma)
    event = ReplanEvent(
        t_trigger=t_now,
        deviations=deviations,
        selected_dims=tuple(force_dims),
        conditioned_values=values,
        t_mix=t_mix,
        t_cond=t_cond,
    )
    return wd_new, lam_des, event


def execute_with_monitor(env, wd: WeightDistribution, basis: BasisSystem,
                         init: InitialState, replan_cfg: ReplanConfig) -> ExecutionLog:
    """Run one monitored episode on an environment handle.

    The environment supplies ``n_dims`` (position dimensions) and a
    ``step(desired_pos, desired_vel) -> (state, measured_force)`` method
    advancing one control period.  Expected forces are read from the
    current desired trajectory, which replanning swaps in place.
    """
    grid = basis.grid
    d_pos = env.n_dims
    f_force = wd.n_dims - d_pos
    if f_force < 1:
        raise ShapeError("weight distribution has no force dimensions")
    n = grid.n_steps
    times = grid.times()

    wd_cur = wd
    lam_des = compose_mean(basis, wd.mu_omega, init)
    des_vel = np.gradient(lam_des.values[:, :d_pos], grid.dt, axis=0)
    force_std = pointwise_std(wd_cur, basis)[:, d_pos:]

    desired = np.zeros((n, d_pos))
    actual = np.zeros((n, d_pos))
    expected_f = np.zeros((n, f_force))
    measured_f = np.zeros((n, f_force))
    expected_std = np.zeros((n, f_force))
    events: list[ReplanEvent] = []
    last_replan_t: float | None = None
    complete = True
    steps_done = 0

    for k in range(n):
        t_k = float(times[k])
        des_p = lam_des.values[k, :d_pos]
        try:
            state, measured = env.step(des_p, des_vel[k])
        except EnvironmentFault:
            complete = False
            break
        expected = lam_des.values[k, d_pos:]

        desired[k] = des_p
        actual[k] = state.position
        expected_f[k] = expected
        measured_f[k] = measured
        expected_std[k] = force_std[k]
        steps_done = k + 1

        triggered, _ = replan_trigger(expected, measured, replan_cfg.delta)
        cooled = last_replan_t is None or (t_k - last_replan_t) >= replan_cfg.cooldown
        has_room = t_k + replan_cfg.cond_lead <= grid.duration and k < n - 1
        if triggered and cooled and has_room:
            init_now = InitialState(
                np.concatenate([state.position, measured]),
                np.concatenate([state.velocity, np.zeros(f_force)]),
            )
            wd_cur, lam_des, event = replan(
                wd_cur, basis, init_now, t_k,
                ForceMeasurement(t_k, measured), expected, replan_cfg,
                init_base=init, lam_old=lam_des,
            )
            des_vel = np.gradient(lam_des.values[:, :d_pos], grid.dt, axis=0)
            force_std = pointwise_std(wd_cur, basis)[:, d_pos:]
            events.append(event)
            last_replan_t = t_k

    sl = slice(0, steps_done)
    return ExecutionLog(
        t=times[sl].copy(),
        desired_pos=desired[sl],
        actual_pos=actual[sl],
        expected_force=expected_f[sl],
        measured_force=measured_f[sl],
        expected_force_std=expected_std[sl],
        events=events,
        complete=complete,
    )
