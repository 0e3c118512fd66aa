"""Movement-primitive core: basis systems, weight fitting, distributions.

A trajectory over a uniform time grid is encoded per dimension by a weight
vector ``[w_1..w_n, g]`` (basis weights plus goal).  For the dynamic kind
("prodmp") each basis column of the system matrix is the integrated response
of the linear attractor

    tau^2 * ydd = alpha * (beta * (g - y) - tau * yd) + f(x)

to a unit weight, the goal column its response to a unit goal, and ``xi1``,
``xi2`` the homogeneous responses to unit initial position/velocity.  By
linearity any weighted trajectory is then an exact superposition, and a set
of demonstrations induces a Gaussian over weights that maps to a Gaussian
over whole trajectories with full covariance across time and dimensions.

The static kind ("promp") stores normalized radial basis values of the
phase directly and ignores the initial state.

Weight layout is dimension-major: ``[dim0: w,g | dim1: w,g | ...]``, and
flattened trajectory vectors follow the same order (all timesteps of dim 0,
then dim 1, ...).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import rollout_columns
from .errors import (
    ConfigurationError,
    IllConditionedError,
    InsufficientDataError,
    NumericError,
    ShapeError,
)

DEFAULT_RIDGE = 1e-9
BASIS_KINDS = ("prodmp", "promp")

# Relative tolerances for covariance invariants.
SYMMETRY_RTOL = 1e-10
EIGENVALUE_RTOL = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid over [0, duration] with n_steps samples."""

    duration: float
    n_steps: int

    def __post_init__(self):
        if not (isinstance(self.n_steps, int) and self.n_steps >= 2):
            raise ConfigurationError(f"n_steps must be an int >= 2, got {self.n_steps}")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ConfigurationError(f"duration must be finite and > 0, got {self.duration}")

    @property
    def dt(self) -> float:
        return self.duration / (self.n_steps - 1)

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.duration, self.n_steps)

    def index_of(self, t: float) -> int:
        """Nearest grid index to time t (clamped to the grid)."""
        k = int(round(t / self.dt))
        return min(max(k, 0), self.n_steps - 1)


@dataclass(frozen=True)
class Trajectory:
    """Sampled multi-dimensional trajectory on a TimeGrid."""

    grid: TimeGrid
    values: np.ndarray  # (n_steps, n_dims)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] != self.grid.n_steps:
            raise ShapeError(
                f"values must be (n_steps={self.grid.n_steps}, n_dims), got {values.shape}"
            )
        if values.shape[1] < 1:
            raise ShapeError("trajectory needs at least one dimension")
        if not np.all(np.isfinite(values)):
            raise NumericError("trajectory contains non-finite values")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_dims(self) -> int:
        return self.values.shape[1]

    def velocities(self) -> np.ndarray:
        """Per-dimension time derivatives by central differences."""
        return np.gradient(self.values, self.grid.dt, axis=0)


@dataclass(frozen=True)
class InitialState:
    """Boundary state (position and velocity) the trajectory starts from."""

    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        pos = np.atleast_1d(np.asarray(self.position, dtype=float))
        vel = np.atleast_1d(np.asarray(self.velocity, dtype=float))
        if pos.shape != vel.shape or pos.ndim != 1:
            raise ShapeError("position and velocity must be equal-length vectors")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise NumericError("initial state contains non-finite values")
        pos.setflags(write=False)
        vel.setflags(write=False)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "velocity", vel)

    @property
    def n_dims(self) -> int:
        return self.position.shape[0]

    @staticmethod
    def rest(position) -> "InitialState":
        position = np.atleast_1d(np.asarray(position, dtype=float))
        return InitialState(position, np.zeros_like(position))

    @staticmethod
    def zeros(n_dims: int) -> "InitialState":
        return InitialState(np.zeros(n_dims), np.zeros(n_dims))


@dataclass(frozen=True)
class DmpConfig:
    """Attractor and basis parameters shared by all dimensions.

    beta defaults to alpha/4 (critical damping).  basis_width is the
    Gaussian width as a fraction of the spacing between adjacent centers
    in phase space.
    """

    alpha: float = 25.0
    beta: float | None = None
    alpha_x: float = 3.0
    tau: float = 1.0
    n_basis: int = 10
    basis_width: float = 0.3

    def __post_init__(self):
        if self.beta is None:
            object.__setattr__(self, "beta", self.alpha / 4.0)
        for name in ("alpha", "beta", "alpha_x", "tau", "basis_width"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigurationError(f"{name} must be finite and > 0, got {v}")
        if not (isinstance(self.n_basis, int) and self.n_basis >= 2):
            raise ConfigurationError(f"n_basis must be an int >= 2, got {self.n_basis}")


@dataclass(frozen=True)
class BasisSystem:
    """Per-timestep basis values plus initial-condition coefficients.

    phi has one column per basis function and a final goal column.  For
    kind "prodmp" the first row of phi is exactly zero, xi1[0] = 1 and
    xi2[0] = 0, so composed trajectories start exactly at the initial state.
    """

    grid: TimeGrid
    phi: np.ndarray  # (n_steps, n_basis + 1)
    xi1: np.ndarray
    xi2: np.ndarray
    kind: str
    cfg: DmpConfig

    def __post_init__(self):
        if self.kind not in BASIS_KINDS:
            raise ConfigurationError(f"kind must be one of {BASIS_KINDS}, got {self.kind!r}")
        for name in ("phi", "xi1", "xi2"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise NumericError(f"basis system field {name} contains non-finite values")

    @property
    def n_basis(self) -> int:
        return self.phi.shape[1] - 1

    @property
    def n_weights_per_dim(self) -> int:
        return self.phi.shape[1]


@dataclass(frozen=True)
class WeightDistribution:
    """Gaussian over stacked per-dimension weight vectors."""

    mu_omega: np.ndarray
    sigma_omega: np.ndarray
    n_dims: int
    sigma_n_sq: float = 0.0

    def __post_init__(self):
        mu = np.asarray(self.mu_omega, dtype=float).ravel()
        sigma = np.asarray(self.sigma_omega, dtype=float)
        if sigma.shape != (mu.size, mu.size):
            raise ShapeError(f"sigma_omega must be ({mu.size},{mu.size}), got {sigma.shape}")
        if not np.all(np.isfinite(mu)) or not np.all(np.isfinite(sigma)):
            raise NumericError("weight distribution contains non-finite values")
        if self.n_dims < 1 or mu.size % self.n_dims != 0:
            raise ShapeError(f"mu size {mu.size} not divisible by n_dims={self.n_dims}")
        if self.sigma_n_sq < 0:
            raise ConfigurationError("sigma_n_sq must be >= 0")
        _check_symmetric_psd(sigma, name="sigma_omega")
        mu.setflags(write=False)
        sigma = sigma.copy()
        sigma.setflags(write=False)
        object.__setattr__(self, "mu_omega", mu)
        object.__setattr__(self, "sigma_omega", sigma)

    @property
    def n_weights_per_dim(self) -> int:
        return self.mu_omega.size // self.n_dims


@dataclass(frozen=True)
class TrajectoryDistribution:
    """Gaussian over flattened trajectories (dimension-major layout)."""

    grid: TimeGrid
    mu_lambda: np.ndarray
    sigma_lambda: np.ndarray
    n_dims: int

    def __post_init__(self):
        mu = np.asarray(self.mu_lambda, dtype=float).ravel()
        sigma = np.asarray(self.sigma_lambda, dtype=float)
        if mu.size != self.grid.n_steps * self.n_dims:
            raise ShapeError("mu_lambda size does not match grid and n_dims")
        if sigma.shape != (mu.size, mu.size):
            raise ShapeError("sigma_lambda shape does not match mu_lambda")
        if not np.all(np.isfinite(mu)):
            raise NumericError("mu_lambda contains non-finite values")
        _check_symmetric_psd(sigma, name="sigma_lambda")
        object.__setattr__(self, "mu_lambda", mu)

    def mean_matrix(self) -> np.ndarray:
        """Mean as (n_steps, n_dims)."""
        return unflatten_dim_major(self.mu_lambda, self.grid.n_steps)

    def std_matrix(self) -> np.ndarray:
        """Pointwise marginal standard deviations as (n_steps, n_dims)."""
        diag = np.sqrt(np.maximum(np.diag(self.sigma_lambda), 0.0))
        return unflatten_dim_major(diag, self.grid.n_steps)


# ---------------------------------------------------------------------------
# layout helpers

def flatten_dim_major(values: np.ndarray) -> np.ndarray:
    """(n_steps, n_dims) -> flat vector, all steps of dim 0 first."""
    return np.asarray(values, dtype=float).T.ravel()


def unflatten_dim_major(vec: np.ndarray, n_steps: int) -> np.ndarray:
    vec = np.asarray(vec, dtype=float).ravel()
    if vec.size % n_steps != 0:
        raise ShapeError(f"vector of size {vec.size} does not split into steps of {n_steps}")
    return vec.reshape(-1, n_steps).T


def split_weights(omega: np.ndarray, n_basis: int):
    """Flat dimension-major weights -> (w of shape (n_dims, n_basis), goals)."""
    omega = np.asarray(omega, dtype=float).ravel()
    nb1 = n_basis + 1
    if omega.size % nb1 != 0:
        raise ShapeError(f"weight vector of size {omega.size} does not split into blocks of {nb1}")
    blocks = omega.reshape(-1, nb1)
    return blocks[:, :-1], blocks[:, -1]


def join_weights(w: np.ndarray, goals: np.ndarray) -> np.ndarray:
    w = np.atleast_2d(np.asarray(w, dtype=float))
    goals = np.atleast_1d(np.asarray(goals, dtype=float))
    if w.shape[0] != goals.size:
        raise ShapeError("one goal per dimension is required")
    return np.hstack([w, goals[:, None]]).ravel()


# ---------------------------------------------------------------------------
# covariance utilities

def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _check_symmetric_psd(sigma: np.ndarray, *, name: str) -> None:
    scale = max(float(np.max(np.abs(sigma))), 1e-300)
    asym = float(np.max(np.abs(sigma - sigma.T)))
    if asym > SYMMETRY_RTOL * max(scale, 1.0):
        raise NumericError(f"{name} is not symmetric (max asymmetry {asym:.3e})")
    eigvals = np.linalg.eigvalsh(symmetrize(sigma))
    top = max(float(eigvals[-1]), 0.0)
    if float(eigvals[0]) < -EIGENVALUE_RTOL * max(top, 1e-300):
        raise NumericError(
            f"{name} is not positive semidefinite (min eig {eigvals[0]:.3e}, max {top:.3e})"
        )


def cholesky_with_jitter(sigma: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, symmetrizing and escalating jitter on failure.

    An exactly-zero matrix factors to zero so degenerate distributions
    sample their mean exactly.
    """
    sigma = symmetrize(np.asarray(sigma, dtype=float))
    scale = float(np.max(np.abs(sigma)))
    if scale == 0.0:
        return np.zeros_like(sigma)
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        pass
    for jitter in (1e-12, 1e-10, 1e-8, 1e-6):
        try:
            return np.linalg.cholesky(sigma + jitter * scale * np.eye(sigma.shape[0]))
        except np.linalg.LinAlgError:
            continue
    raise NumericError("covariance factorization failed even with jitter up to 1e-6")


# ---------------------------------------------------------------------------
# basis construction

def build_phase(cfg: DmpConfig, grid: TimeGrid) -> np.ndarray:
    """Exponentially decaying phase x(t) = exp(-alpha_x * t / tau)."""
    return phase_at(cfg, grid.times())


def phase_at(cfg: DmpConfig, t: np.ndarray) -> np.ndarray:
    return np.exp(-cfg.alpha_x * np.asarray(t, dtype=float) / cfg.tau)


def _basis_centers_widths(cfg: DmpConfig, duration: float):
    """Gaussian centers equally spaced in time, mapped through the phase."""
    t_centers = np.linspace(0.0, duration, cfg.n_basis)
    centers = phase_at(cfg, t_centers)
    gaps = np.abs(np.diff(centers))
    widths = np.empty(cfg.n_basis)
    widths[0] = gaps[0]
    widths[-1] = gaps[-1]
    for i in range(1, cfg.n_basis - 1):
        widths[i] = max(gaps[i - 1], gaps[i])
    return centers, cfg.basis_width * widths


def _basis_values(cfg: DmpConfig, duration: float, x: np.ndarray) -> np.ndarray:
    """Unnormalized Gaussian basis activations at phase values x."""
    centers, widths = _basis_centers_widths(cfg, duration)
    z = (np.asarray(x, dtype=float)[:, None] - centers[None, :]) / widths[None, :]
    return np.exp(-0.5 * z * z)


def _forcing_columns(cfg: DmpConfig, duration: float, t: np.ndarray) -> np.ndarray:
    """Per-basis forcing terms, shape (len(t), n_basis).

    f_i = x * phi_i(x) / sum_j phi_j(x), rescaled per basis by
    alpha*beta / x(center_i) so that unit-weight responses have amplitude
    near one regardless of where the center sits on the decaying phase.
    Without the rescaling late response columns are orders of magnitude
    smaller than early ones and weight fitting turns ill-conditioned.
    """
    x = phase_at(cfg, t)
    psi = _basis_values(cfg, duration, x)
    centers, _ = _basis_centers_widths(cfg, duration)
    scales = cfg.alpha * cfg.beta / centers
    return psi * (x / psi.sum(axis=1))[:, None] * scales[None, :]


def build_basis(cfg: DmpConfig, grid: TimeGrid, kind: str = "prodmp",
                refine: int = 10) -> BasisSystem:
    """Construct the basis system for a grid.

    For "prodmp" every column is integrated with RK4 on a ``refine`` times
    finer grid and subsampled, so the same rollout backs both this system
    and ``integrate_dmp`` and the two agree to rounding error.
    """
    if kind not in BASIS_KINDS:
        raise ConfigurationError(f"kind must be one of {BASIS_KINDS}, got {kind!r}")
    nb = cfg.n_basis

    if kind == "promp":
        x = build_phase(cfg, grid)
        psi = _basis_values(cfg, grid.duration, x)
        phi = np.empty((grid.n_steps, nb + 1))
        phi[:, :nb] = psi / psi.sum(axis=1)[:, None]
        phi[:, nb] = 1.0
        zeros = np.zeros(grid.n_steps)
        return BasisSystem(grid, phi, zeros, zeros.copy(), kind, cfg)

    if refine < 1:
        raise ConfigurationError("refine must be >= 1")
    n_fine = (grid.n_steps - 1) * refine
    h = grid.duration / n_fine
    t_half = np.linspace(0.0, grid.duration, 2 * n_fine + 1)

    # Columns: one per basis weight, then goal, then the two homogeneous
    # responses (unit initial position, unit initial velocity).
    n_cols = nb + 3
    f_half = np.zeros((n_cols, 2 * n_fine + 1))
    f_half[:nb] = _forcing_columns(cfg, grid.duration, t_half).T
    goals = np.zeros(n_cols)
    goals[nb] = 1.0
    y0 = np.zeros(n_cols)
    y0[nb + 1] = 1.0
    v0 = np.zeros(n_cols)
    v0[nb + 2] = 1.0

    fine = rollout_columns(f_half, goals, y0, v0, cfg.alpha, cfg.beta, cfg.tau, h)
    coarse = fine[::refine]

    for j in range(n_cols):
        if not np.all(np.isfinite(coarse[:, j])):
            label = (
                f"basis column {j}" if j < nb
                else {nb: "goal column", nb + 1: "xi1", nb + 2: "xi2"}[j]
            )
            raise NumericError(f"integration produced non-finite values in {label}")

    phi = coarse[:, : nb + 1].copy()
    xi1 = coarse[:, nb + 1].copy()
    xi2 = coarse[:, nb + 2].copy()
    # Exact boundary values by construction; re-assert to keep them bitwise.
    phi[0, :] = 0.0
    xi1[0] = 1.0
    xi2[0] = 0.0
    return BasisSystem(grid, phi, xi1, xi2, kind, cfg)


# ---------------------------------------------------------------------------
# composition and fitting

def _weight_blocks(basis: BasisSystem, omega: np.ndarray) -> np.ndarray:
    omega = np.asarray(omega, dtype=float).ravel()
    nb1 = basis.n_weights_per_dim
    if omega.size % nb1 != 0:
        raise ShapeError(
            f"weight vector of size {omega.size} does not split into blocks of {nb1}"
        )
    return omega.reshape(-1, nb1)


def compose_mean(basis: BasisSystem, omega: np.ndarray, init: InitialState) -> Trajectory:
    """Trajectory generated by a weight vector from an initial state."""
    blocks = _weight_blocks(basis, omega)
    n_dims = blocks.shape[0]
    if init.n_dims != n_dims:
        raise ShapeError(f"initial state has {init.n_dims} dims, weights imply {n_dims}")
    values = (
        np.outer(basis.xi1, init.position)
        + np.outer(basis.xi2, init.velocity)
        + basis.phi @ blocks.T
    )
    return Trajectory(basis.grid, values)


def fit_weights(traj: Trajectory, basis: BasisSystem, init: InitialState,
                ridge: float = DEFAULT_RIDGE) -> np.ndarray:
    """Least-squares weights reproducing a trajectory on the basis system.

    Solves, independently per dimension, the ridge-regularized normal
    equations for the residual after subtracting the homogeneous response
    of the initial state.
    """
    if traj.grid != basis.grid:
        raise ShapeError("trajectory and basis system use different grids")
    if init.n_dims != traj.n_dims:
        raise ShapeError("initial state dimension does not match trajectory")
    if ridge < 0:
        raise ConfigurationError("ridge must be >= 0")

    phi = basis.phi
    nb1 = phi.shape[1]
    residual = (
        traj.values
        - np.outer(basis.xi1, init.position)
        - np.outer(basis.xi2, init.velocity)
    )
    # Solve in augmented form [phi; sqrt(ridge) I] to avoid squaring the
    # condition number of the response columns.
    if ridge == 0.0:
        a = phi
        b = residual
    else:
        a = np.vstack([phi, math.sqrt(ridge) * np.eye(nb1)])
        b = np.vstack([residual, np.zeros((nb1, traj.n_dims))])
    blocks, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if ridge == 0.0 and rank < nb1:
        raise IllConditionedError("normal equations are rank deficient; pass ridge > 0")
    return blocks.T.ravel()


def fit_weight_distribution(weights, eps_reg: float | None = None, *,
                            n_dims: int, sigma_n_sq: float = 1e-6) -> WeightDistribution:
    """Sample mean and unbiased covariance of demonstration weight vectors.

    eps_reg is added to the diagonal verbatim when given; by default a
    trace-scaled regularizer (1e-8 * trace/dim) keeps near-degenerate
    sample covariances factorizable.
    """
    vectors = [np.asarray(w, dtype=float).ravel() for w in weights]
    if len(vectors) < 2:
        raise InsufficientDataError(
            f"need at least 2 weight vectors to estimate a distribution, got {len(vectors)}"
        )
    size = vectors[0].size
    if any(v.size != size for v in vectors):
        raise ShapeError("all weight vectors must have the same length")

    stacked = np.vstack(vectors)
    mu = stacked.mean(axis=0)
    centered = stacked - mu
    sigma = centered.T @ centered / (len(vectors) - 1)
    if eps_reg is None:
        eps_reg = 1e-8 * float(np.trace(sigma)) / size
        if eps_reg == 0.0:
            eps_reg = 1e-12
    elif eps_reg < 0:
        raise ConfigurationError("eps_reg must be >= 0")
    sigma = symmetrize(sigma) + eps_reg * np.eye(size)
    return WeightDistribution(mu, sigma, n_dims=n_dims, sigma_n_sq=sigma_n_sq)


def trajectory_distribution(wd: WeightDistribution, basis: BasisSystem,
                            init: InitialState) -> TrajectoryDistribution:
    """Push the weight Gaussian through the basis system (full covariance)."""
    nb1 = basis.n_weights_per_dim
    if wd.n_weights_per_dim != nb1:
        raise ShapeError("weight distribution does not match basis size")
    n_dims = wd.n_dims
    n_steps = basis.grid.n_steps

    mean = compose_mean(basis, wd.mu_omega, init)
    mu_lambda = flatten_dim_major(mean.values)

    sigma_blocks = wd.sigma_omega.reshape(n_dims, nb1, n_dims, nb1)
    sigma_lambda = np.empty((n_dims * n_steps, n_dims * n_steps))
    for di in range(n_dims):
        for dj in range(n_dims):
            block = basis.phi @ sigma_blocks[di, :, dj, :] @ basis.phi.T
            sigma_lambda[
                di * n_steps:(di + 1) * n_steps, dj * n_steps:(dj + 1) * n_steps
            ] = block
    sigma_lambda = symmetrize(sigma_lambda)
    if wd.sigma_n_sq > 0:
        sigma_lambda[np.diag_indices_from(sigma_lambda)] += wd.sigma_n_sq
    return TrajectoryDistribution(basis.grid, mu_lambda, sigma_lambda, n_dims)


def pointwise_std(wd: WeightDistribution, basis: BasisSystem) -> np.ndarray:
    """Marginal trajectory standard deviations, (n_steps, n_dims).

    Cheap diagonal of the pushforward covariance; includes sigma_n_sq.
    """
    nb1 = basis.n_weights_per_dim
    n_dims = wd.n_dims
    sigma_blocks = wd.sigma_omega.reshape(n_dims, nb1, n_dims, nb1)
    out = np.empty((basis.grid.n_steps, n_dims))
    for d in range(n_dims):
        var = np.einsum("ti,ij,tj->t", basis.phi, sigma_blocks[d, :, d, :], basis.phi)
        out[:, d] = np.sqrt(np.maximum(var + wd.sigma_n_sq, 0.0))
    return out


def sample_trajectories(wd: WeightDistribution, basis: BasisSystem,
                        init: InitialState, n: int, seed) -> list[Trajectory]:
    """Draw weight vectors and compose them; deterministic per seed."""
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    rng = np.random.default_rng(seed)
    chol = cholesky_with_jitter(wd.sigma_omega)
    draws = rng.standard_normal((n, wd.mu_omega.size))
    omegas = wd.mu_omega[None, :] + draws @ chol.T
    return [compose_mean(basis, omega, init) for omega in omegas]


def integrate_dmp(cfg: DmpConfig, omega, goal, init: InitialState,
                  grid: TimeGrid, refine: int = 10) -> Trajectory:
    """Directly integrate the attractor ODE with a full forcing term.

    omega holds the basis weights per dimension (shape (n_dims, n_basis) or
    flat), goal the per-dimension attractor targets.  Uses the same refined
    RK4 grid as ``build_basis`` so both constructions agree to rounding.
    """
    w = np.asarray(omega, dtype=float)
    if w.ndim == 1:
        if w.size % cfg.n_basis != 0:
            raise ShapeError(f"weights of size {w.size} do not split into rows of {cfg.n_basis}")
        w = w.reshape(-1, cfg.n_basis)
    goals = np.atleast_1d(np.asarray(goal, dtype=float))
    n_dims = w.shape[0]
    if goals.size != n_dims or init.n_dims != n_dims:
        raise ShapeError("weights, goal, and initial state disagree on dimension count")
    if refine < 1:
        raise ConfigurationError("refine must be >= 1")

    n_fine = (grid.n_steps - 1) * refine
    h = grid.duration / n_fine
    t_half = np.linspace(0.0, grid.duration, 2 * n_fine + 1)
    f_half = _forcing_columns(cfg, grid.duration, t_half) @ w.T  # (n_half, n_dims)

    fine = rollout_columns(f_half.T, goals, init.position, init.velocity,
                           cfg.alpha, cfg.beta, cfg.tau, h)
    values = fine[::refine]
    if not np.all(np.isfinite(values)):
        raise NumericError("DMP integration produced non-finite values")
    return Trajectory(grid, values)
