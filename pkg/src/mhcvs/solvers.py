"""Block solvers: MH-ST (ADMM over sparsity + Tikhonov), the MH-Tikhonov
baseline, soft thresholding and the SPL-lite iterative recovery."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from mhcvs.hypotheses import HypothesisSet
from mhcvs.tensor import DctBasis, MeasurementMatrix, cho_factor_spd, cho_solve

SPD_JITTER = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    lambda1: float = 1.0
    lambda2: float = 1000.0
    rho: float = 0.01
    k_max: int = 10

    def __post_init__(self):
        if min(self.lambda1, self.lambda2, self.rho) <= 0:
            raise ValueError("lambda1, lambda2 and rho must be strictly positive")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")


@dataclass(frozen=True)
class SplConfig:
    """Landweber + DCT soft-threshold schedule: threshold ``tau0 * ratio**k`` at step k."""

    iters: int = 50
    tau0: float = 100.0
    ratio: float = 0.9
    power_iters: int = 20

    def schedule(self) -> np.ndarray:
        return self.tau0 * self.ratio ** np.arange(self.iters)


@dataclass
class AdmmState:
    x: np.ndarray
    omega: np.ndarray
    z: np.ndarray
    iteration: int = 0

    @classmethod
    def zeros(cls, n: int, p: int) -> "AdmmState":
        return cls(np.zeros(n), np.zeros(p), np.zeros(n))


@dataclass(frozen=True, eq=False)
class MhStResult:
    omega: np.ndarray
    x_block: np.ndarray
    cost_trace: np.ndarray = field(repr=False)
    primal_residual_trace: np.ndarray = field(repr=False)


def soft_threshold(v, alpha: float) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - alpha, 0.0)


def mh_st_cost(omega, hyp: HypothesisSet, cfg: SolverConfig) -> float:
    """||y - A w||^2 + lambda1 ||Gamma w||^2 + lambda2 ||B w||_1."""
    r = hyp.y - hyp.A @ omega
    return float(r @ r + cfg.lambda1 * np.sum((hyp.gamma * omega) ** 2) + cfg.lambda2 * np.sum(np.abs(hyp.B @ omega)))


def normal_matrix(hyp: HypothesisSet, cfg: SolverConfig) -> np.ndarray:
    """C = 2 A'A + 2 lambda1 Gamma'Gamma + rho B'B."""
    C = 2.0 * (hyp.A.T @ hyp.A) + cfg.rho * (hyp.B.T @ hyp.B)
    C[np.diag_indices_from(C)] += 2.0 * cfg.lambda1 * hyp.gamma ** 2
    return 0.5 * (C + C.T)


def factor_normal_matrix(hyp: HypothesisSet, cfg: SolverConfig):
    return cho_factor_spd(normal_matrix(hyp, cfg), jitter=SPD_JITTER)


def admm_x_update(state: AdmmState, B: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    return (cfg.lambda2 / cfg.rho) * soft_threshold((cfg.rho * (B @ state.omega) - state.z) / cfg.lambda2, 1.0)


def admm_omega_update(state: AdmmState, hyp: HypothesisSet, cfg: SolverConfig, C_factor) -> np.ndarray:
    rhs = hyp.B.T @ (state.z + cfg.rho * state.x) + 2.0 * (hyp.A.T @ hyp.y)
    return cho_solve(C_factor, rhs)


def admm_dual_update(state: AdmmState, B: np.ndarray, rho: float) -> np.ndarray:
    return state.z + rho * (state.x - B @ state.omega)


def mh_st_solve(y, hyp: HypothesisSet, cfg: SolverConfig = SolverConfig()) -> MhStResult:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != hyp.y.shape:
        raise ValueError(f"measurement shape {y.shape} != hypothesis set {hyp.y.shape}")
    if not np.array_equal(y, hyp.y):
        hyp = HypothesisSet(hyp.H, hyp.A, hyp.B, hyp.gamma, y)
    B = hyp.B
    C_factor = factor_normal_matrix(hyp, cfg)
    state = AdmmState.zeros(B.shape[0], hyp.p)
    costs = np.empty(cfg.k_max)
    primal = np.empty(cfg.k_max)
    for k in range(cfg.k_max):
        state.x = admm_x_update(state, B, cfg)
        state.omega = admm_omega_update(state, hyp, cfg, C_factor)
        state.z = admm_dual_update(state, B, cfg.rho)
        state.iteration = k + 1
        costs[k] = mh_st_cost(state.omega, hyp, cfg)
        primal[k] = np.linalg.norm(state.x - B @ state.omega)
    return MhStResult(state.omega, hyp.H @ state.omega, costs, primal)


def mh_tikhonov_weights(hyp: HypothesisSet, lam: float) -> np.ndarray:
    """argmin_w ||y - A w||^2 + lam ||Gamma w||^2."""
    if lam <= 0:
        raise ValueError("Tikhonov weight must be positive")
    M = hyp.A.T @ hyp.A
    M[np.diag_indices_from(M)] += lam * hyp.gamma ** 2
    M = 0.5 * (M + M.T)
    return cho_solve(cho_factor_spd(M, jitter=SPD_JITTER), hyp.A.T @ hyp.y)


def mh_tikhonov_solve(y, hyp: HypothesisSet, lam: float = 1.0) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if not np.array_equal(y, hyp.y):
        hyp = HypothesisSet(hyp.H, hyp.A, hyp.B, hyp.gamma, y)
    return hyp.H @ mh_tikhonov_weights(hyp, lam)


def landweber_step_scale(op: np.ndarray, power_iters: int = 20) -> float:
    """Largest eigenvalue of op'op by power iteration from a fixed start vector."""
    v = np.random.default_rng(0).standard_normal(op.shape[1])
    v /= np.linalg.norm(v)
    c = 1.0
    for _ in range(power_iters):
        w = op.T @ (op @ v)
        c = float(np.linalg.norm(w))
        if c == 0.0:
            return 1.0
        v = w / c
    return c


def whiten(phi: MeasurementMatrix) -> tuple[np.ndarray, np.ndarray]:
    """(Q', R') with Phi = R' Q' and Q' having orthonormal rows.

    Landweber on (Q', R'^-1 y) solves the same consistency constraint as on
    (Phi, y) but with every nonzero singular value equal to one.
    """
    q, r = np.linalg.qr(phi.entries.T)
    return q.T, r.T


def spl_lite_recover(
    y,
    phi: MeasurementMatrix,
    dct: DctBasis,
    spl: SplConfig = SplConfig(),
    tau_schedule=None,
    clamp: bool = True,
) -> np.ndarray:
    """Recover block(s) from ``y`` by Landweber steps and DCT-domain soft thresholding.

    ``y`` may be one measurement vector (m,) or a matrix (m, k) of k blocks sharing
    ``phi``; the result has the matching shape (n,) or (n, k). ``tau_schedule``
    overrides the schedule from ``spl``. With ``clamp`` the output is clipped to
    the 8-bit pixel range.
    """
    y = np.asarray(y, dtype=np.float64)
    if phi.m > phi.n:
        raise ValueError("more measurements than unknowns")
    if y.shape[0] != phi.m:
        raise ValueError(f"measurement length {y.shape[0]} != {phi.m}")
    taus = spl.schedule() if tau_schedule is None else np.asarray(tau_schedule, dtype=np.float64)
    P, R = whiten(phi)
    yw = scipy.linalg.solve_triangular(R, y, lower=True, check_finite=False)
    step = 1.0 / landweber_step_scale(P, spl.power_iters)
    x = np.zeros((phi.n,) + y.shape[1:])
    for tau in taus:
        x = x + step * (P.T @ (yw - P @ x))
        if tau > 0:
            x = dct.inverse @ soft_threshold(dct.forward @ x, tau)
    if clamp:
        x = np.clip(x, 0.0, 255.0)
    return x
