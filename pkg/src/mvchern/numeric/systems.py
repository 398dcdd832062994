"""Polynomial systems built from a camera configuration.

Both systems are homogeneous in world coordinates X = (x, y, z, w) and are
pulled back along a random affine chart ``X = A @ (u, 1)``, so that the
three unknowns ``u`` reach every point of P^3 off one random plane.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..cameras import CameraConfig
from .homotopy import PolySystem


def random_chart(rng: np.random.Generator) -> np.ndarray:
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    return A / np.linalg.norm(A, axis=0)


class _ChartSystem(PolySystem):
    n = 3

    def __init__(self, config: CameraConfig, chart: np.ndarray, tol: float = 1e-7, pseudo_tol: float = 1e-8):
        arr = config.as_array()
        # rows normalized so that forbidden-locus tests are scale free
        self.rows = arr / np.linalg.norm(arr, axis=2, keepdims=True)
        self.N = config.N
        self.chart = np.asarray(chart, dtype=complex)
        self.tol = tol
        self.pseudo_tol = pseudo_tol

    def world(self, u: np.ndarray) -> np.ndarray:
        return self.chart @ np.append(u, 1.0)

    def chart_coordinates(self, X) -> np.ndarray:
        """Inverse of :meth:`world` up to scale (X must not lie on the chart's plane at infinity)."""
        y = np.linalg.solve(self.chart, np.asarray(X, dtype=complex))
        return y[:3] / y[3]

    def plane_values(self, u: np.ndarray) -> np.ndarray:
        X = self.world(u)
        return (self.rows[:, 2, :] @ X) / np.linalg.norm(X)

    def forbidden(self, u):
        """Near some camera plane, or a root only because every term carries a
        small h factor (the terms of F do not actually cancel)."""
        if np.min(np.abs(self.plane_values(u))) < self.tol:
            return True
        return self.relative_residual(u) >= self.pseudo_tol

    def relative_residual(self, u) -> float:
        """max_r |F_r| / sum_k |term_{r,k}|: cancellation left among the terms of F."""
        X = self.world(np.asarray(u, dtype=complex))
        terms = self.terms_world(X / np.linalg.norm(X))
        denom = np.sum(np.abs(terms), axis=1)
        num = np.abs(np.sum(terms, axis=1))
        with np.errstate(all="ignore"):
            ratio = np.where(denom > 0, num / denom, 0.0)
        return float(np.max(ratio))

    def terms_world(self, X) -> np.ndarray:
        """Additive terms of each equation at one world point, shape (3, K)."""
        raise NotImplementedError

    def evaluate_batch(self, U):
        X = np.concatenate([U, np.ones((len(U), 1))], axis=1) @ self.chart.T
        F, JX = self.evaluate_world(X)
        return F, JX @ self.chart[:, :3]

    def evaluate_world(self, X):
        """F and dF/dX at world points X of shape (M, 4)."""
        raise NotImplementedError


def _prod_except(vals: np.ndarray, skip: Sequence[int]) -> np.ndarray:
    """Product over the last axis, leaving out the listed columns."""
    keep = [k for k in range(vals.shape[-1]) if k not in skip]
    return np.prod(vals[..., keep], axis=-1)


class SlicingSystem(_ChartSystem):
    """L_r(phi(X)) = 0 for three random linear forms L_r on P^{2N}."""

    def __init__(self, config: CameraConfig, slices: np.ndarray, chart: np.ndarray, tol: float = 1e-7):
        super().__init__(config, chart, tol)
        self.slices = np.asarray(slices, dtype=complex)
        self.degrees = (self.N,) * 3

    def phi_and_jacobian(self, X):
        N = self.N
        R = self.rows
        M = len(X)
        vals = np.einsum("nrc,mc->mnr", R, X)  # f_i, g_i, h_i at each point
        h = vals[:, :, 2]
        Hrows = R[:, 2, :]
        phi = np.empty((M, 2 * N + 1), dtype=complex)
        J = np.empty((M, 2 * N + 1, 4), dtype=complex)
        for i in range(N):
            P = _prod_except(h, [i])
            dP = np.zeros((M, 4), dtype=complex)
            for j in range(N):
                if j != i:
                    dP += _prod_except(h, [i, j])[:, None] * Hrows[j]
            for r in range(2):
                phi[:, 2 * i + r] = vals[:, i, r] * P
                J[:, 2 * i + r] = P[:, None] * R[i, r] + vals[:, i, r][:, None] * dP
        phi[:, -1] = np.prod(h, axis=1)
        J[:, -1] = sum(_prod_except(h, [j])[:, None] * Hrows[j] for j in range(N))
        return phi, J

    def terms_world(self, X):
        phi, _ = self.phi_and_jacobian(X[None])
        return self.slices * phi

    def evaluate_world(self, X):
        phi, J = self.phi_and_jacobian(X)
        return phi @ self.slices.T, np.einsum("rk,mkc->mrc", self.slices, J)


class CriticalSystem(_ChartSystem):
    """Critical equations of the affine reprojection error.

    With error(q) = sum_i (f_i/h_i - u_{2i-1})^2 + (g_i/h_i - u_{2i})^2, the
    equations are (1/2) grad error * prod_i h_i^3, written homogeneously:

        sum_i [(f_i - a_i h_i)(h_i df_i - f_i dh_i) + (g_i - b_i h_i)(h_i dg_i - g_i dh_i)] prod_{j!=i} h_j^3

    where df_i is the (x, y, z) part of row f_i.  Each equation has degree 3N - 1.
    """

    def __init__(self, config: CameraConfig, data: Sequence[float], chart: np.ndarray, tol: float = 1e-7):
        super().__init__(config, chart, tol)
        # the error function is not scale invariant, so keep the raw rows here
        self.raw = config.as_array().astype(complex)
        self.data = np.asarray(data, dtype=complex).reshape(self.N, 2)
        self.degrees = (3 * self.N - 1,) * 3

    def finite(self, u):
        X = self.world(u)
        return bool(abs(X[3]) > self.tol * np.linalg.norm(X))

    def relative_residual(self, u) -> float:
        # at a zero-error point every term vanishes on its own and the ratio is 0/0
        X = self.world(np.asarray(u, dtype=complex))
        vals = self.raw @ (X / np.linalg.norm(X))
        fit = self.data * vals[:, 2:3]
        scale = np.abs(vals[:, :2]) + np.abs(fit)
        with np.errstate(all="ignore"):
            mismatch = float(np.max(np.abs(vals[:, :2] - fit) / scale))
        if mismatch < self.pseudo_tol:
            return mismatch
        return super().relative_residual(u)

    def terms_world(self, X):
        R = self.raw
        vals = R @ X
        h = vals[:, 2]
        out = []
        for i in range(self.N):
            P = np.prod(np.delete(h, i) ** 3)
            c = R[i, 2, :3]
            for r in range(2):
                resid = vals[i, r] - self.data[i, r] * h[i]
                out.append(resid * (h[i] * R[i, r, :3] - vals[i, r] * c) * P)
        return np.array(out).T

    def _constant_parts(self):
        cached = getattr(self, "_consts", None)
        if cached is None:
            R = self.raw
            A, c, Hrow = R[:, :2, :3], R[:, 2, :3], R[:, 2, :]
            dresid = R[:, :2, :] - self.data[:, :, None] * Hrow[:, None, :]
            dvec = A[..., None] * Hrow[:, None, None, :] - c[:, None, :, None] * R[:, :2, None, :]
            cached = self._consts = (A, c, Hrow, dresid, dvec)
        return cached

    def evaluate_world(self, X):
        N = self.N
        A, c, Hrow, dresid, dvec = self._constant_parts()
        vals = np.einsum("nrc,mc->mnr", self.raw, X)
        h = vals[:, :, 2]
        fr = vals[:, :, :2]
        h3 = h**3
        # P[:, i] = prod_{j != i} h_j^3 and its gradient
        P = np.stack([_prod_except(h3, [i]) for i in range(N)], axis=1)
        dP = np.zeros((len(X), N, 4), dtype=complex)
        for i in range(N):
            for j in range(N):
                if j != i:
                    dP[:, i] += (3 * h[:, j] ** 2 * _prod_except(h3, [i, j]))[:, None] * Hrow[j]
        resid = fr - self.data[None] * h[:, :, None]
        vec = h[:, :, None, None] * A[None] - fr[..., None] * c[None, :, None, :]
        S = np.einsum("mnr,mnrk->mnk", resid, vec)
        dS = np.einsum("mnrk,nrc->mnkc", vec, dresid) + np.einsum("mnr,nrkc->mnkc", resid, dvec)
        F = np.einsum("mnk,mn->mk", S, P)
        J = np.einsum("mnkc,mn->mkc", dS, P) + np.einsum("mnk,mnc->mkc", S, dP)
        return F, J


def reprojection_error(config: CameraConfig, data: Sequence[float], q: Sequence[complex]) -> complex:
    arr = config.as_array().astype(complex)
    X = np.append(np.asarray(q, dtype=complex), 1.0)
    vals = arr @ X
    d = np.asarray(data, dtype=complex).reshape(-1, 2)
    return complex(np.sum((vals[:, 0] / vals[:, 2] - d[:, 0]) ** 2 + (vals[:, 1] / vals[:, 2] - d[:, 1]) ** 2))


def affine_point(system: _ChartSystem, u: np.ndarray) -> Optional[np.ndarray]:
    """World point (x, y, z) of a chart solution, or None at infinity."""
    X = system.world(u)
    if abs(X[3]) < 1e-14 * np.linalg.norm(X):
        return None
    return X[:3] / X[3]
