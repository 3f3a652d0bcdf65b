"""Conjugate filtering for a Gaussian state-space outcome model.

The state vector holds a baseline response level and a treatment offset.
One filtering step per patient: evolve the belief through the system
matrix (adding evolution noise W), forecast the next observation under an
arm's design row, then condition on the observed outcome.  All operations
are pure: they return fresh values and never mutate their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalDomainError

# Covariance eigenvalues in [-PSD_TOL, 0] are rounding noise and get
# clamped to zero; anything below -PSD_TOL means the recursion corrupted.
PSD_TOL = 1e-10


def _as_vector(x, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalDomainError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _as_square(x, dim: int, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.shape != (dim, dim):
        raise ValueError(f"{name} must be {dim}x{dim}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalDomainError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _min_eig_sym(mat: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix (closed form for 2x2)."""
    if mat.shape == (2, 2):
        a, b, c = mat[0, 0], mat[0, 1], mat[1, 1]
        half_gap = math.hypot((a - c) / 2.0, b)
        return (a + c) / 2.0 - half_gap
    return float(np.linalg.eigvalsh(mat)[0])


def _symmetrize(mat: np.ndarray) -> np.ndarray:
    return (mat + mat.T) / 2.0


def _ensure_psd(mat: np.ndarray, name: str) -> np.ndarray:
    """Symmetrize and clamp rounding-level negative eigenvalues to zero.

    Eigenvalues below -PSD_TOL are not rounding noise and raise.
    """
    sym = _symmetrize(mat)
    lo = _min_eig_sym(sym)
    if lo < -PSD_TOL:
        raise NumericalDomainError(f"{name} has eigenvalue {lo} below -{PSD_TOL}")
    if lo < 0.0:
        vals, vecs = np.linalg.eigh(sym)
        vals = np.clip(vals, 0.0, None)
        sym = _symmetrize((vecs * vals) @ vecs.T)
    return sym


@dataclass(frozen=True)
class DlmSpec:
    """Model matrices: per-arm design rows, system matrix G, evolution
    variance W, and scalar observation variance V."""

    design_a: np.ndarray
    design_b: np.ndarray
    G: np.ndarray
    W: np.ndarray
    V: float

    def __post_init__(self):
        da = _as_vector(self.design_a, "design_a")
        db = _as_vector(self.design_b, "design_b")
        if da.shape != db.shape:
            raise ValueError("design rows must have equal length")
        dim = da.shape[0]
        g = _as_square(self.G, dim, "G")
        w = _ensure_psd(_as_square(self.W, dim, "W"), "W")
        w.setflags(write=False)
        v = float(self.V)
        if not (math.isfinite(v) and v > 0.0):
            raise NumericalDomainError(f"V must be a positive finite scalar, got {v}")
        object.__setattr__(self, "design_a", da)
        object.__setattr__(self, "design_b", db)
        object.__setattr__(self, "G", g)
        object.__setattr__(self, "W", w)
        object.__setattr__(self, "V", v)

    @property
    def state_dim(self) -> int:
        return self.design_a.shape[0]


def standard_spec(omega: float, v: float = 1.0) -> DlmSpec:
    """Two-state spec with identity evolution and isotropic noise omega*I.

    Arm A observes the baseline only ([1, 0]); arm B observes baseline
    plus treatment offset ([1, 1]).
    """
    return DlmSpec(
        design_a=np.array([1.0, 0.0]),
        design_b=np.array([1.0, 1.0]),
        G=np.eye(2),
        W=float(omega) * np.eye(2),
        V=v,
    )


def independent_arms_spec(omega: float, v: float = 1.0) -> DlmSpec:
    """Two-state spec where each component is one arm's own mean.

    With orthogonal design rows and diagonal W the covariance stays
    diagonal, so this runs the two arms as independent local-level
    filters inside the same state vector.
    """
    return DlmSpec(
        design_a=np.array([1.0, 0.0]),
        design_b=np.array([0.0, 1.0]),
        G=np.eye(2),
        W=float(omega) * np.eye(2),
        V=v,
    )


@dataclass(frozen=True)
class DlmState:
    """Filtered belief after t observations: theta ~ N(m, C)."""

    m: np.ndarray
    C: np.ndarray
    t: int = 0

    def __post_init__(self):
        m = _as_vector(self.m, "m")
        c = _ensure_psd(_as_square(self.C, m.shape[0], "C"), "C")
        c.setflags(write=False)
        if self.t < 0:
            raise ValueError("t must be non-negative")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "t", int(self.t))


@dataclass(frozen=True)
class StatePrior:
    """One-step-evolved belief theta ~ N(a, R), before seeing the next
    outcome.  ``t`` is carried from the originating state so the updated
    state can count absorbed observations."""

    a: np.ndarray
    R: np.ndarray
    t: int = 0


@dataclass(frozen=True)
class Forecast:
    """Predictive mean and variance of the next outcome under one arm."""

    f: float
    Q: float


@dataclass(frozen=True)
class UpdateDiagnostics:
    """Transients of one conditioning step: the gain vector and the
    forecast error it was applied to."""

    gain: np.ndarray
    error: float


def evolve(state: DlmState, spec: DlmSpec) -> StatePrior:
    """Push the belief one step forward: a = G m, R = G C G' + W."""
    a = spec.G @ state.m
    r = _symmetrize(spec.G @ state.C @ spec.G.T + spec.W)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(r))):
        raise NumericalDomainError("evolve produced non-finite values")
    return StatePrior(a=a, R=r, t=state.t)


def forecast_arm(prior: StatePrior, design: np.ndarray, v: float) -> Forecast:
    """Predictive distribution of the next outcome: f = d'a, Q = d'Rd + V."""
    f = float(design @ prior.a)
    q = float(design @ prior.R @ design) + v
    if not (math.isfinite(f) and math.isfinite(q)):
        raise NumericalDomainError("forecast produced non-finite values")
    if q <= 0.0:
        raise NumericalDomainError(f"predictive variance {q} <= 0: corrupted prior covariance")
    return Forecast(f=f, Q=q)


def update_detailed(
    prior: StatePrior, design: np.ndarray, fc: Forecast, y: float
) -> tuple[DlmState, UpdateDiagnostics]:
    """Condition the prior on outcome y observed under ``design``.

    Gain A = R d / Q, error e = y - f, posterior mean a + A e and
    covariance R - Q A A' (symmetrized and clamped to the PSD cone).
    """
    if not math.isfinite(y):
        raise NumericalDomainError(f"observation must be finite, got {y}")
    gain = prior.R @ design / fc.Q
    err = y - fc.f
    m = prior.a + gain * err
    c = prior.R - fc.Q * np.outer(gain, gain)
    state = DlmState(m=m, C=c, t=prior.t + 1)
    return state, UpdateDiagnostics(gain=gain, error=err)


def update(prior: StatePrior, design: np.ndarray, fc: Forecast, y: float) -> DlmState:
    state, _ = update_detailed(prior, design, fc, y)
    return state
