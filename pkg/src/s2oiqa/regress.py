"""Epsilon support vector regression with RBF kernel, trained by SMO."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError, InvalidArgument, ShapeError

KKT_TOL = 1e-3
MAX_ITER = 10_000_000

C_GRID = [2.0 ** k for k in range(-1, 10)]
GAMMA_GRID = [2.0 ** k for k in range(-9, 4)]
EPSILON_GRID = [0.1, 1.0]


@dataclass(frozen=True)
class ScalingParams:
    lo: np.ndarray
    hi: np.ndarray

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        span = self.hi - self.lo
        out = np.zeros_like(x)
        nz = span > 0
        out[:, nz] = 2.0 * (x[:, nz] - self.lo[nz]) / span[nz] - 1.0
        return out

    @staticmethod
    def identity(dim: int) -> "ScalingParams":
        return ScalingParams(lo=np.full(dim, -1.0), hi=np.full(dim, 1.0))


@dataclass(frozen=True)
class SvrModel:
    support_vectors: np.ndarray  # (n_sv, dim), already scaled
    dual_coeffs: np.ndarray      # alpha - alpha*, one per support vector
    bias: float
    gamma: float
    c: float
    epsilon: float
    scaling: ScalingParams


def scale_fit_transform(x: np.ndarray) -> tuple[np.ndarray, ScalingParams]:
    """Fit a per-dimension affine map onto [-1, 1] and apply it."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.size == 0:
        raise InvalidArgument("empty feature matrix")
    params = ScalingParams(lo=x.min(axis=0), hi=x.max(axis=0))
    return params.transform(x), params


def _sqdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aa = np.sum(a * a, axis=1)[:, None]
    bb = np.sum(b * b, axis=1)[None, :]
    return np.maximum(aa + bb - 2.0 * a @ b.T, 0.0)


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    return np.exp(-gamma * _sqdist(a, b))


@njit(cache=True)
def _smo_core(K, y, C, eps, tol, max_iter):  # pragma: no cover - jitted
    n = K.shape[0]
    m = 2 * n
    alpha = np.zeros(m)
    sign = np.empty(m)
    p = np.empty(m)
    for i in range(n):
        sign[i] = 1.0
        sign[n + i] = -1.0
        p[i] = eps - y[i]
        p[n + i] = eps + y[i]
    G = p.copy()
    it = 0
    while it < max_iter:
        it += 1
        # first index: largest violation among I_up
        i = -1
        gmax = -1e300
        for t in range(m):
            if (sign[t] > 0.0 and alpha[t] < C) or (sign[t] < 0.0 and alpha[t] > 0.0):
                v = -sign[t] * G[t]
                if v > gmax:
                    gmax = v
                    i = t
        ii = i % n
        qii = K[ii, ii]
        # second index: best second-order decrease among I_low
        j = -1
        gmin = 1e300
        best = 0.0
        for t in range(m):
            if (sign[t] > 0.0 and alpha[t] > 0.0) or (sign[t] < 0.0 and alpha[t] < C):
                v = -sign[t] * G[t]
                if v < gmin:
                    gmin = v
                bdiff = gmax - v
                if bdiff > 0.0:
                    tt = t % n
                    a = qii + K[tt, tt] - 2.0 * K[ii, tt]
                    if a <= 0.0:
                        a = 1e-12
                    dec = -(bdiff * bdiff) / a
                    if dec < best:
                        best = dec
                        j = t
        if gmax - gmin < tol or j == -1:
            break
        jj = j % n
        old_i = alpha[i]
        old_j = alpha[j]
        quad = qii + K[jj, jj] - 2.0 * K[ii, jj]
        if quad <= 0.0:
            quad = 1e-12
        if sign[i] != sign[j]:
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0.0:
                if alpha[j] < 0.0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0.0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0.0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            delta = (G[i] - G[j]) / quad
            ssum = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if ssum > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = ssum - C
            else:
                if alpha[j] < 0.0:
                    alpha[j] = 0.0
                    alpha[i] = ssum
            if ssum > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = ssum - C
            else:
                if alpha[i] < 0.0:
                    alpha[i] = 0.0
                    alpha[j] = ssum
        di = alpha[i] - old_i
        dj = alpha[j] - old_j
        for t in range(m):
            tt = t % n
            G[t] += sign[t] * (sign[i] * K[tt, ii] * di + sign[j] * K[tt, jj] * dj)
    # dual objective 0.5*a'Qa + p'a = 0.5*sum a*(G+p)
    obj = 0.0
    for t in range(m):
        obj += alpha[t] * (G[t] + p[t])
    obj *= 0.5
    # bias via KKT conditions
    ub = 1e300
    lb = -1e300
    sumfree = 0.0
    nfree = 0
    for t in range(m):
        yg = sign[t] * G[t]
        if alpha[t] >= C - 1e-12:
            if sign[t] < 0.0:
                if yg < ub:
                    ub = yg
            else:
                if yg > lb:
                    lb = yg
        elif alpha[t] <= 1e-12:
            if sign[t] > 0.0:
                if yg < ub:
                    ub = yg
            else:
                if yg > lb:
                    lb = yg
        else:
            sumfree += yg
            nfree += 1
    rho = sumfree / nfree if nfree > 0 else 0.5 * (ub + lb)
    beta = alpha[:n] - alpha[n:]
    return beta, -rho, obj, it


def smo_solve(K: np.ndarray, y: np.ndarray, c: float, epsilon: float,
              tol: float = KKT_TOL, max_iter: int = MAX_ITER):
    """Solve the epsilon-SVR dual on a precomputed kernel matrix.

    Returns (dual_coeffs, bias, dual_objective).
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    beta, bias, obj, it = _smo_core(K, y, float(c), float(epsilon),
                                    float(tol), int(max_iter))
    if it >= max_iter:
        raise ConvergenceError(f"SMO failed to converge in {max_iter} iterations")
    return beta, float(bias), float(obj)


def svr_train(x: np.ndarray, y: np.ndarray, c: float, gamma: float,
              epsilon: float, seed: int = 0,
              scaling: ScalingParams | None = None) -> SvrModel:
    """Train epsilon-SVR with RBF kernel on pre-scaled inputs."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(x) != len(y) or len(y) < 2:
        raise InvalidArgument("need matching x/y with at least 2 samples")
    if c <= 0 or gamma <= 0 or epsilon < 0:
        raise InvalidArgument("hyperparameters must be positive (epsilon >= 0)")
    del seed  # selection rule is already deterministic; kept for the interface
    K = rbf_kernel(x, x, gamma)
    beta, bias, _ = smo_solve(K, y, c, epsilon)
    keep = np.abs(beta) > 1e-12
    if not np.any(keep):
        keep = np.zeros(len(x), dtype=bool)
        keep[0] = True  # keep one vector with zero coefficient
    if scaling is None:
        scaling = ScalingParams.identity(x.shape[1])
    return SvrModel(support_vectors=x[keep].copy(), dual_coeffs=beta[keep].copy(),
                    bias=bias, gamma=float(gamma), c=float(c),
                    epsilon=float(epsilon), scaling=scaling)


def svr_predict(model: SvrModel, x: np.ndarray) -> np.ndarray:
    """Predict quality scores; applies the model's feature scaling."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.support_vectors.shape[1]:
        raise ShapeError(f"feature dim {x.shape[1]} != model dim {model.support_vectors.shape[1]}")
    xs = model.scaling.transform(x)
    K = rbf_kernel(model.support_vectors, xs, model.gamma)
    return model.dual_coeffs @ K + model.bias


def _cv_rmse(D: np.ndarray, y: np.ndarray, fold_ids: np.ndarray, folds: int,
             c: float, gamma: float, epsilon: float) -> float:
    K = np.exp(-gamma * D)
    sq_err = 0.0
    n = 0
    for f in range(folds):
        test = fold_ids == f
        train = ~test
        beta, bias, _ = smo_solve(K[np.ix_(train, train)], y[train], c, epsilon)
        pred = beta @ K[np.ix_(train, test)] + bias
        sq_err += float(np.sum((pred - y[test]) ** 2))
        n += int(test.sum())
    return (sq_err / n) ** 0.5


def grid_search(x: np.ndarray, y: np.ndarray, folds: int = 5, seed: int = 0,
                c_grid=None, gamma_grid=None, epsilon_grid=None) -> tuple[float, float, float]:
    """Pick (c, gamma, epsilon) by lowest mean cross-validated RMSE."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(x) < folds:
        raise InvalidArgument(f"need at least {folds} samples for {folds}-fold CV")
    c_grid = C_GRID if c_grid is None else c_grid
    gamma_grid = GAMMA_GRID if gamma_grid is None else gamma_grid
    epsilon_grid = EPSILON_GRID if epsilon_grid is None else epsilon_grid
    rng = np.random.default_rng(seed)
    fold_ids = np.mod(rng.permutation(len(x)), folds)
    D = _sqdist(x, x)
    best = None
    for gamma in sorted(gamma_grid):
        for c in sorted(c_grid):
            for eps in sorted(epsilon_grid):
                rmse = _cv_rmse(D, y, fold_ids, folds, c, gamma, eps)
                key = (rmse, c, gamma, eps)
                if best is None or key < best:
                    best = key
    return best[1], best[2], best[3]
