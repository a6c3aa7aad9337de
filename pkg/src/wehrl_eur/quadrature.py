"""Phase-space quadrature for integrals against d^{2M}z / pi^M.

Each mode gets a polar grid: Gauss-Laguerre nodes in t = |z|^2 / scale and
uniformly spaced angles. Multi-mode grids are tensor products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_genlaguerre

from .errors import DomainError

MAX_RADIAL_ORDER = 100


@lru_cache(maxsize=64)
def _mode_rule(radial_order: int, angular_order: int, scale: float, alpha: float):
    t, w = roots_genlaguerre(radial_order, alpha)
    # int_0^inf F(u) du = scale * sum_k w_k t_k^-alpha e^{t_k} F(scale t_k); d^2z/pi = du dtheta / (2 pi)
    radial_w = scale * np.exp(np.log(w) + t - alpha * np.log(t))
    theta = 2.0 * np.pi * np.arange(angular_order) / angular_order
    r = np.sqrt(scale * t)
    nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = np.repeat(radial_w / angular_order, angular_order)
    return nodes, weights


def _isotropic_error(radial_order: int, scale: float, alpha: float, width: float) -> float:
    # Q(u) = exp(-u/width)/width integrates to 1 with entropy 1 + ln(width)
    t, w = roots_genlaguerre(radial_order, alpha)
    rw = scale * np.exp(np.log(w) + t - alpha * np.log(t))
    u = scale * t
    q = np.exp(-u / width) / width
    norm = float(np.dot(rw, q))
    ent = float(np.dot(rw, q * (u / width + math.log(width))))
    return max(abs(norm - 1.0), abs(ent - 1.0 - math.log(width)))


def _anisotropic_error(radial_order: int, angular_order: int, scale: float, alpha: float,
                       widths: tuple[float, float]) -> float:
    # Q = exp(-x^2/c1 - y^2/c2)/sqrt(c1 c2); norm 1, entropy 1 + ln(c1 c2)/2
    nodes, weights = _mode_rule(radial_order, angular_order, scale, alpha)
    c1, c2 = widths
    e = nodes.real ** 2 / c1 + nodes.imag ** 2 / c2
    pref = 1.0 / math.sqrt(c1 * c2)
    q = pref * np.exp(-e)
    norm = float(np.dot(weights, q))
    ent = float(np.dot(weights, q * (e - math.log(pref))))
    return max(abs(norm - 1.0), abs(ent - 1.0 - 0.5 * math.log(c1 * c2)))


def _probe_error(nodes: np.ndarray, weights: np.ndarray, C: np.ndarray) -> float:
    # Husimi of covariance C - I/2: norm 1, Wehrl entropy M + ln det(C) / 2
    M = nodes.shape[1]
    r = np.empty((nodes.shape[0], 2 * M))
    r[:, 0::2] = math.sqrt(2.0) * nodes.real
    r[:, 1::2] = math.sqrt(2.0) * nodes.imag
    _, logdet = np.linalg.slogdet(C)
    e = 0.5 * np.einsum("ni,ij,nj->n", r, np.linalg.inv(C), r, optimize=True)
    q = np.exp(-0.5 * logdet - e)
    norm = float(np.sum(weights * q))
    ent = float(np.sum(weights * q * (e + 0.5 * logdet)))
    return max(abs(norm - 1.0), abs(ent - M - 0.5 * logdet))


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and weights approximating the integral over C^M against d^{2M}z/pi^M."""

    M: int
    radial_order: int
    angular_order: int
    scale: float
    alpha: float = 0.0
    nodes: np.ndarray = field(repr=False, compare=False, default=None)
    weights: np.ndarray = field(repr=False, compare=False, default=None)
    error_budget: float = field(compare=False, default=0.0)
    probe: np.ndarray | None = field(repr=False, compare=False, default=None)

    @property
    def size(self) -> int:
        return self.weights.size

    def integrate(self, values) -> float:
        """Weighted sum over the nodes (fixed pairwise summation order)."""
        values = np.asarray(values, dtype=float)
        return float(np.sum(self.weights * values))

    def refined(self, factor: int = 2) -> "QuadratureGrid":
        return build_grid(self.M, self.radial_order * factor, self.angular_order * factor, self.scale, self.alpha,
                          self.probe)


def build_grid(M: int, radial_order: int = 24, angular_order: int = 24, scale: float = 1.0,
               alpha: float = 0.0, probe: np.ndarray | None = None) -> QuadratureGrid:
    """Tensor-product polar grid on C^M.

    ``scale`` should match the widest Gaussian width of the integrand (the
    largest eigenvalue of Sigma + I/2 in quadrature units); the quadrature is
    exact for exp(-|z|^2/scale) times a polynomial in |z|^2.

    ``probe`` is a covariance Sigma_A + I/2 (quadrature units). When given,
    the Gaussian Husimi function with that covariance joins the error probes:
    its norm and entropy are known exactly, so squeezed or rotated integrands
    get an honest budget.
    """
    M = int(M)
    if M < 1:
        raise DomainError("grid needs at least one mode")
    if radial_order < 4 or angular_order < 4:
        raise DomainError("radial and angular orders must be >= 4")
    if radial_order > MAX_RADIAL_ORDER:
        raise DomainError(f"radial order above {MAX_RADIAL_ORDER} underflows the Laguerre weights")
    if not scale > 0:
        raise DomainError("grid scale must be positive")
    scale = float(scale)
    nodes1, weights1 = _mode_rule(int(radial_order), int(angular_order), scale, float(alpha))
    nodes = nodes1[:, None]
    weights = weights1
    for _ in range(M - 1):
        nodes = np.concatenate([np.repeat(nodes, nodes1.size, axis=0), np.tile(nodes1, nodes.shape[0])[:, None]], axis=1)
        weights = np.outer(weights, weights1).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)

    prev = max(4, radial_order - 1)
    errs = []
    for width in (0.75 * scale, 0.5 * scale):
        errs.append(_isotropic_error(radial_order, scale, alpha, width))
        errs.append(abs(_isotropic_error(radial_order, scale, alpha, width) - _isotropic_error(prev, scale, alpha, width)))
    errs.append(_anisotropic_error(radial_order, angular_order, scale, alpha, (scale, 0.5 * scale)))
    if probe is not None:
        probe = np.array(probe, dtype=float)
        if probe.shape != (2 * M, 2 * M):
            raise DomainError(f"probe covariance must be {2 * M}x{2 * M}")
        probe.setflags(write=False)
        errs.append(_probe_error(nodes, weights, probe))
    # summation round-off, so a probe that coincides with the integrand still bounds it
    budget = M * max(errs) + nodes.shape[0] * np.finfo(float).eps
    return QuadratureGrid(M, int(radial_order), int(angular_order), scale, float(alpha), nodes, weights, budget, probe)


def grid_for_covariance(sigma_A: np.ndarray, radial_order: int = 24, angular_order: int = 24,
                        alpha: float = 0.0) -> QuadratureGrid:
    """Grid whose scale matches the widest direction of the Husimi function of ``sigma_A``."""
    sigma_A = np.asarray(sigma_A, dtype=float)
    M = sigma_A.shape[0] // 2
    C = sigma_A + 0.5 * np.eye(2 * M)
    scale = float(np.linalg.eigvalsh(C)[-1])
    return build_grid(M, radial_order, angular_order, scale, alpha, C)
