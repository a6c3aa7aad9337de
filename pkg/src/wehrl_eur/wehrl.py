"""Husimi functions and (conditional) Wehrl entropies.

Two independent routes are provided: closed forms for Gaussian states, and
quadrature of the heterodyne-conditioned Fock-space operators.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .fock import FockOperator, conditional_batch, matrix_entropy, partial_trace_modes
from .quadrature import QuadratureGrid, build_grid, grid_for_covariance  # noqa: F401  (re-exported)
from .symplectic import (
    GaussianState,
    _as_labels,
    _check_disjoint,
    _require_physical,
    entropy_from_symplectic,
    marginal,
    symplectic_eigenvalues,
    von_neumann_entropy,
)

GAUSSIAN = "gaussian-closed-form"
GAUSSIAN_QUAD = "gaussian-quadrature"
FOCK = "fock-quadrature"


@dataclass(frozen=True)
class EntropyBundle:
    """Joint entropy S(ZB), memory entropy S(B) and S(Z|B) = S(ZB) - S(B)."""

    S_ZB: float
    S_B: float
    method: str
    error_budget: float = 0.0
    husimi_norm: float = 1.0
    notes: tuple = field(default=())

    @property
    def S_Z_given_B(self) -> float:
        return self.S_ZB - self.S_B

    def to_dict(self) -> dict:
        d = asdict(self)
        d["S_Z_given_B"] = self.S_Z_given_B
        d["notes"] = list(self.notes)
        return d

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _quadrature_vector(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    r = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    r[..., 0::2] = math.sqrt(2.0) * z.real
    r[..., 1::2] = math.sqrt(2.0) * z.imag
    return r


def husimi_gaussian(state: GaussianState, z):
    """<z|rho|z> = det(S + I/2)^(-1/2) exp(-r^T (S + I/2)^(-1) r / 2), r = sqrt(2) (Re z, Im z)."""
    M = state.n_modes
    z = np.asarray(z, dtype=np.complex128)
    single = z.ndim <= 1
    z2 = np.atleast_2d(z.reshape(-1, M) if z.ndim <= 1 else z)
    if z2.shape[-1] != M:
        raise ValueError(f"need points in C^{M}, got shape {z.shape}")
    C = state.sigma + 0.5 * np.eye(2 * M)
    sign, logdet = np.linalg.slogdet(C)
    vals = math.exp(-0.5 * logdet) * _kernels.gaussian_quadform(_quadrature_vector(z2), np.linalg.inv(C))
    return float(vals[0]) if single else vals


def _wehrl(sigma: np.ndarray) -> float:
    M = sigma.shape[0] // 2
    _, logdet = np.linalg.slogdet(sigma + 0.5 * np.eye(2 * M))
    return float(M + 0.5 * logdet)


def wehrl_entropy_gaussian(state: GaussianState) -> float:
    """Wehrl entropy M + ln det(Sigma + I/2) / 2."""
    _require_physical(state)
    return _wehrl(state.sigma)


def conditional_covariance(state: GaussianState, A, B) -> np.ndarray:
    """Covariance of B after heterodyne on A (independent of the outcome)."""
    A, B = _as_labels(A), _as_labels(B)
    p = state.partition
    ia, ib = p.quadrature_indices(A), p.quadrature_indices(B)
    s = state.sigma
    sa = s[np.ix_(ia, ia)] + 0.5 * np.eye(ia.size)
    sab = s[np.ix_(ia, ib)]
    cond = s[np.ix_(ib, ib)] - sab.T @ np.linalg.solve(sa, sab)
    return 0.5 * (cond + cond.T)


def conditional_wehrl_gaussian(state: GaussianState, A, B) -> EntropyBundle:
    """S(Z|B) from S(B|Z) + S(Z) - S(B); A is heterodyned, B is the memory (may be empty)."""
    A, B = _as_labels(A), _as_labels(B)
    _check_disjoint(A, B)
    _require_physical(state)
    s_z = _wehrl(marginal(state, A).sigma)
    if not B:
        return EntropyBundle(s_z, 0.0, GAUSSIAN, 1e-9)
    s_b_given_z = entropy_from_symplectic(symplectic_eigenvalues(conditional_covariance(state, A, B)))
    s_b = von_neumann_entropy(marginal(state, B))
    return EntropyBundle(s_z + s_b_given_z, s_b, GAUSSIAN, 1e-9)


def conditional_wehrl_gaussian_quadrature(state: GaussianState, A, B, grid: QuadratureGrid | None = None) -> EntropyBundle:
    """Same quantity as :func:`conditional_wehrl_gaussian`, integrating -Q ln Q on a grid.

    The conditional B state is Q(z) tau with tau independent of z, so
    -Tr[q ln q] = -Q ln Q + Q S(tau) pointwise.
    """
    A, B = _as_labels(A), _as_labels(B)
    _check_disjoint(A, B)
    _require_physical(state)
    rho_a = marginal(state, A)
    if grid is None:
        grid = grid_for_covariance(rho_a.sigma)
    q = husimi_gaussian(rho_a, grid.nodes)
    safe = np.maximum(q, 1e-300)
    norm = grid.integrate(q)
    s_z = grid.integrate(-q * np.log(safe))
    if B:
        s_tau = entropy_from_symplectic(symplectic_eigenvalues(conditional_covariance(state, A, B)))
        s_b = von_neumann_entropy(marginal(state, B))
    else:
        s_tau = s_b = 0.0
    # the grid budget bounds both the norm and the -Q ln Q error; S(tau) multiplies the norm error
    budget = grid.error_budget * (1.0 + abs(s_tau))
    return EntropyBundle(s_z + s_tau * norm, s_b, GAUSSIAN_QUAD, budget, norm)


def conditional_wehrl_fock(rho_AB: FockOperator, A_modes: int, grid: QuadratureGrid, kappa: float = 1.0) -> EntropyBundle:
    """S(Z|B) by quadrature of -Tr_B[q ln q], q = <z|rho_AB|z>, over the grid.

    With ``kappa`` > 1 the amplifier is applied to A first, through the
    rescaling <z|A_k(rho)|z> = k^-M <z/sqrt(k)|rho|z/sqrt(k)>.
    """
    if grid.M != A_modes:
        raise ValueError(f"grid has {grid.M} modes but A has {A_modes}")
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    factor = kappa ** (-A_modes)
    q = conditional_batch(rho_AB, np.asarray(grid.nodes) / math.sqrt(kappa))
    lam = np.clip(np.linalg.eigvalsh(q), 0.0, None) * factor
    norm = grid.integrate(lam.sum(axis=-1))
    s_zb = grid.integrate(_kernels.neg_xlogx_sum(lam))
    if rho_AB.space.modes > A_modes or rho_AB.space.aux_dim > 1:
        s_b = matrix_entropy(partial_trace_modes(rho_AB, A_modes), normalize=False)
    else:
        s_b = 0.0
    notes = []
    loss = rho_AB.truncation_loss
    if loss > 1e-4:
        notes.append(f"unreliable: truncation loss {loss:.2e} exceeds 1e-4")
    budget = grid.error_budget + abs(norm - 1.0) * (1.0 + abs(s_zb)) + loss
    return EntropyBundle(s_zb, s_b, FOCK, budget, norm, tuple(notes))
