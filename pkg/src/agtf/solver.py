"""Alternating-direction solver for anchor-graph tensor factorization.

The anchor-graph tensor ``S`` (n x m x V) is factored as ``S ~ H * G^T`` with a
nonnegative, t-orthogonal sample indicator tensor ``H`` (n x K x V) and an
anchor indicator tensor ``G`` (m x K x V) whose rows lie on the probability
simplex. Both factors carry a tensor Schatten p-norm penalty. Auxiliary
copies ``Q = H`` (nonnegativity), ``J = H`` and ``F = G`` (low rank) are tied
in with multipliers ``Y1, Y2, Y3`` and geometrically growing penalties.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .shrinkage import ProxParams, prox_schatten_p, schatten_p_norm
from .tensor3 import NumericFailure, as_tensor3, facewise, map_slices, mode3_dft, t_product, t_transpose, to_real


@dataclass(frozen=True)
class SolverConfig:
    K: int
    lambda1: float = 10.0
    lambda2: float = 10.0
    p: float = 0.5
    mu0: float = 1e-5
    rho0: float = 1e-5
    sigma0: float = 1e-5
    eta: float = 1.3
    penalty_cap: float = 1e13
    epsilon: float = 1e-7
    max_iter: int = 300
    rotate_prox: bool = True
    seed: int = 0
    # compute half the frequency slices and mirror conjugates
    use_symmetry: bool = False

    def __post_init__(self):
        if self.K < 2:
            raise ValueError(f"K must be >= 2, got {self.K}")
        if not 0 < self.p <= 1:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("lambda1 and lambda2 must be nonnegative")
        if min(self.mu0, self.rho0, self.sigma0, self.penalty_cap, self.epsilon) <= 0:
            raise ValueError("penalties, penalty_cap and epsilon must be positive")
        if self.eta <= 1:
            raise ValueError(f"eta must exceed 1, got {self.eta}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def as_dict(self):
        return asdict(self)


@dataclass
class TraceRecord:
    iter: int
    res_hq: float
    res_hj: float
    res_gf: float
    objective: float
    mu: float
    rho: float
    sigma: float


@dataclass
class SolverState:
    config: SolverConfig
    S: np.ndarray
    Sbar: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    J: np.ndarray
    G: np.ndarray
    F: np.ndarray
    Y1: np.ndarray
    Y2: np.ndarray
    Y3: np.ndarray
    # number of multiplier updates applied so far
    steps: int = 0
    iter: int = 0
    trace: list = field(default_factory=list)

    def penalty(self, initial):
        c = self.config
        return min(initial * c.eta**self.steps, c.penalty_cap)

    @property
    def mu(self):
        return self.penalty(self.config.mu0)

    @property
    def rho(self):
        return self.penalty(self.config.rho0)

    @property
    def sigma(self):
        return self.penalty(self.config.sigma0)


@dataclass
class ClusterResult:
    sample_labels: np.ndarray
    anchor_labels: np.ndarray
    iterations: int
    converged: bool
    trace: list


def simplex_project(B):
    """Euclidean projection of each row of ``B`` onto ``{x >= 0, sum(x) = 1}``."""
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    k = B.shape[1]
    U = -np.sort(-B, axis=1)
    css = np.cumsum(U, axis=1) - 1.0
    idx = np.arange(1, k + 1)
    cond = U - css / idx > 0
    r = k - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(B.shape[0]), r] / (r + 1)
    return np.maximum(B - theta[:, None], 0.0)


def polar_factor(B):
    """Maximizer of ``Re tr(H^H B)`` over ``H`` with orthonormal columns."""
    u, _, vh = np.linalg.svd(B, full_matrices=False)
    return u @ vh


def init_state(S, config):
    """Rectangular identity ``H`` in every frequency slice, ``Q = J = H``,
    zero multipliers, and ``G = F`` from one projected least-squares pass."""
    S = as_tensor3(S).astype(np.float64)
    n, m, V = S.shape
    K = config.K
    if K > min(n, m):
        raise ValueError(f"K={K} exceeds min(n={n}, m={m})")
    Hbar = np.zeros((n, K, V), dtype=complex)
    Hbar[np.arange(K), np.arange(K), :] = 1.0
    H = to_real(mode3_dft(Hbar, inverse=True), "initial H")
    zeros_nk = np.zeros((n, K, V))
    zeros_mk = np.zeros((m, K, V))
    state = SolverState(
        config=config,
        S=S,
        Sbar=mode3_dft(S),
        H=H,
        Q=H.copy(),
        J=H.copy(),
        G=zeros_mk.copy(),
        F=zeros_mk.copy(),
        Y1=zeros_nk.copy(),
        Y2=zeros_nk.copy(),
        Y3=zeros_mk.copy(),
    )
    update_G(state)
    state.F = state.G.copy()
    return state


def update_G(state):
    sigma = state.sigma
    Hbar = mode3_dft(state.H)
    SH = to_real(
        mode3_dft(facewise(state.Sbar, Hbar, adjoint_a=True), inverse=True),
        "S^T * H",
    )
    B1 = (SH + 0.5 * (sigma * state.F - state.Y3)) / (1.0 + 0.5 * sigma)
    G = np.empty_like(B1)
    for v in range(B1.shape[2]):
        G[:, :, v] = simplex_project(B1[:, :, v])
    state.G = G
    return state


def update_H(state):
    mu, rho = state.mu, state.rho
    SG = facewise(state.Sbar, mode3_dft(state.G))
    B2 = 2.0 * SG + mode3_dft(mu * state.Q - state.Y1 + rho * state.J - state.Y2)
    Hbar = map_slices(polar_factor, B2, symmetric=state.config.use_symmetry)
    state.H = to_real(mode3_dft(Hbar, inverse=True), "H update")
    return state


def update_Q(state):
    state.Q = np.maximum(state.H + state.Y1 / state.mu, 0.0)
    return state


def _prox(state, Z, lam, penalty):
    c = state.config
    params = ProxParams(
        tau=lam / penalty, p=c.p, rotate=c.rotate_prox, symmetric=c.use_symmetry
    )
    return prox_schatten_p(Z, params)


def update_J(state):
    state.J = _prox(state, state.H + state.Y2 / state.rho, state.config.lambda1, state.rho)
    return state


def update_F(state):
    state.F = _prox(state, state.G + state.Y3 / state.sigma, state.config.lambda2, state.sigma)
    return state


def update_multipliers(state):
    state.Y1 = state.Y1 + state.mu * (state.H - state.Q)
    state.Y2 = state.Y2 + state.rho * (state.H - state.J)
    state.Y3 = state.Y3 + state.sigma * (state.G - state.F)
    state.steps += 1
    return state


def residuals(state):
    """Max-abs gaps ``(H - Q, H - J, G - F)``."""
    return (
        float(np.max(np.abs(state.H - state.Q))),
        float(np.max(np.abs(state.H - state.J))),
        float(np.max(np.abs(state.G - state.F))),
    )


def objective(state):
    c = state.config
    fit = state.S - t_product(state.H, t_transpose(state.G))
    value = float(np.sum(fit**2))
    if c.lambda1:
        value += c.lambda1 * schatten_p_norm(state.H, c.p, c.rotate_prox) ** c.p
    if c.lambda2:
        value += c.lambda2 * schatten_p_norm(state.G, c.p, c.rotate_prox) ** c.p
    return value


def step(state):
    """One sweep G, H, Q, J, F, multipliers; appends a trace record."""
    update_G(state)
    update_H(state)
    update_Q(state)
    update_J(state)
    update_F(state)
    update_multipliers(state)
    state.iter += 1
    res = residuals(state)
    state.trace.append(
        TraceRecord(state.iter, *res, objective(state), state.mu, state.rho, state.sigma)
    )
    return res


def extract_labels(state, converged=False):
    """Argmax of the view-averaged ``Q`` (samples) and ``G`` (anchors); ties go low."""
    Qavg = state.Q.mean(axis=2)
    Gavg = state.G.mean(axis=2)
    return ClusterResult(
        sample_labels=np.argmax(Qavg, axis=1),
        anchor_labels=np.argmax(Gavg, axis=1),
        iterations=state.iter,
        converged=converged,
        trace=list(state.trace),
    )


def run(S, config, callback=None):
    """Iterate until every residual is ``<= epsilon`` or ``max_iter`` is hit.

    Non-convergence is reported through ``ClusterResult.converged``, not raised.
    ``callback(state)`` is invoked after every iteration.
    """
    state = init_state(S, config)
    converged = False
    while state.iter < config.max_iter:
        res = step(state)
        if callback is not None:
            callback(state)
        if not all(math.isfinite(r) for r in res):
            raise NumericFailure(f"non-finite residuals at iteration {state.iter}")
        if max(res) <= config.epsilon:
            converged = True
            break
    return state, extract_labels(state, converged)
