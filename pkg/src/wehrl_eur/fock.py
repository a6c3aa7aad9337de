"""Truncated Fock-space oracle.

Brute-force counterparts of the Gaussian closed forms: coherent states,
heterodyne conditioning, matrix entropies, and numerical checkers for the
Berezin-Lieb inequality with quantum memory and Jensen's trace inequality.

The memory system B may be bosonic (further Fock modes) and/or a finite
``aux_dim``-level system appended after the modes.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import DomainError, PhysicalityError, PreconditionError, StructureError
from .quadrature import QuadratureGrid

NEG_EIG_TOL = 1e-7
HERM_TOL = 1e-10


@dataclass(frozen=True)
class FockSpace:
    """``modes`` bosonic modes truncated at photon number ``cutoff`` (plus an optional finite factor)."""

    modes: int
    cutoff: int
    aux_dim: int = 1

    def __post_init__(self):
        if self.modes < 0 or (self.modes == 0 and self.aux_dim < 1):
            raise StructureError("a Fock space needs modes >= 0 and aux_dim >= 1")
        if self.cutoff < 1:
            raise StructureError("cutoff must be >= 1")
        if self.aux_dim < 1:
            raise StructureError("aux_dim must be >= 1")

    @property
    def mode_dim(self) -> int:
        return (self.cutoff + 1) ** self.modes

    @property
    def dim(self) -> int:
        return self.mode_dim * self.aux_dim

    def split(self, a_modes: int) -> tuple[int, "FockSpace"]:
        """Dimension of the first ``a_modes`` modes and the space of the remainder."""
        if not 0 < a_modes <= self.modes:
            raise StructureError(f"cannot split {a_modes} modes off a {self.modes}-mode space")
        return (self.cutoff + 1) ** a_modes, FockSpace(self.modes - a_modes, self.cutoff, self.aux_dim)


@dataclass(frozen=True)
class FockState:
    space: FockSpace
    amplitudes: np.ndarray = field(repr=False)
    truncation_loss: float = 0.0

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def density(self) -> "FockOperator":
        v = self.amplitudes
        return FockOperator(self.space, np.outer(v, v.conj()), hermitian=True, truncation_loss=self.truncation_loss)


@dataclass(frozen=True)
class FockOperator:
    space: FockSpace
    matrix: np.ndarray = field(repr=False)
    hermitian: bool = True
    truncation_loss: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (self.space.dim, self.space.dim):
            raise StructureError(f"matrix shape {m.shape} does not match space dimension {self.space.dim}")
        if self.hermitian:
            err = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
            if err > HERM_TOL * max(1.0, float(np.max(np.abs(m)))):
                raise StructureError(f"operator flagged Hermitian deviates by {err:.2e}")
            m = 0.5 * (m + m.conj().T)
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def to_dict(self) -> dict:
        flat = np.empty(2 * self.matrix.size)
        flat[0::2] = self.matrix.real.ravel()
        flat[1::2] = self.matrix.imag.ravel()
        return {
            "modes": self.space.modes,
            "cutoff": self.space.cutoff,
            "aux_dim": self.space.aux_dim,
            "dims": [self.space.dim, self.space.dim],
            "hermitian": self.hermitian,
            "truncation_loss": self.truncation_loss,
            "data": [float(x) for x in flat],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "FockOperator":
        space = FockSpace(int(d["modes"]), int(d["cutoff"]), int(d.get("aux_dim", 1)))
        rows, cols = d["dims"]
        flat = np.asarray(d["data"], dtype=float)
        if flat.size != 2 * rows * cols:
            raise StructureError("data length does not match dims")
        m = (flat[0::2] + 1j * flat[1::2]).reshape(rows, cols)
        return cls(space, m, hermitian=bool(d.get("hermitian", True)), truncation_loss=float(d.get("truncation_loss", 0.0)))

    @classmethod
    def from_json(cls, text: str) -> "FockOperator":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# states


def _multimode_coherent(z: np.ndarray, cutoff: int) -> np.ndarray:
    """Rows of <n_1..n_M|z> for a batch of points z with shape (n, M)."""
    z = np.atleast_2d(np.asarray(z, dtype=np.complex128))
    per_mode = [_kernels.coherent_amplitudes(z[:, i], cutoff) for i in range(z.shape[1])]
    out = per_mode[0]
    for amp in per_mode[1:]:
        out = (out[:, :, None] * amp[:, None, :]).reshape(z.shape[0], -1)
    return out


def coherent_vector(z, space: FockSpace) -> FockState:
    """Truncated coherent state |z> on ``space``; the lost norm is reported, not renormalized."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if space.aux_dim != 1 or z.size != space.modes:
        raise StructureError(f"need {space.modes} coherent amplitudes on a purely bosonic space")
    amps = _multimode_coherent(z[None, :], space.cutoff)[0]
    loss = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    if loss > 1e-8:
        warnings.warn(f"coherent state truncated at cutoff {space.cutoff} loses norm {loss:.2e}", stacklevel=2)
    return FockState(space, amps, loss)


def fock_basis_state(n: Sequence[int] | int, space: FockSpace) -> FockState:
    n = np.atleast_1d(n)
    idx = int(np.ravel_multi_index(tuple(int(k) for k in n), (space.cutoff + 1,) * space.modes)) if space.modes else 0
    v = np.zeros(space.dim, dtype=np.complex128)
    v[idx * space.aux_dim] = 1.0
    return FockState(space, v)


def thermal_operator(mean_photon: float, cutoff: int) -> FockOperator:
    """Single-mode thermal state with the given mean photon number, truncated at ``cutoff``."""
    if mean_photon < 0:
        raise DomainError("mean photon number must be >= 0")
    space = FockSpace(1, cutoff)
    if mean_photon == 0:
        p = np.zeros(cutoff + 1)
        p[0] = 1.0
        return FockOperator(space, np.diag(p).astype(complex))
    q = mean_photon / (mean_photon + 1.0)
    p = (1.0 - q) * q ** np.arange(cutoff + 1)
    return FockOperator(space, np.diag(p).astype(complex), truncation_loss=float(q ** (cutoff + 1)))


def schmidt_parameter(a: float) -> float:
    if not a >= 1:
        raise DomainError(f"two-mode squeezing parameter must satisfy a >= 1, got {a}")
    return math.sqrt((a - 1.0) / (a + 1.0))


def tmsv_fock(a: float, space: FockSpace) -> FockState:
    """sqrt(1 - lam^2) sum_n lam^n |n, n> with lam = sqrt((a-1)/(a+1))."""
    lam = schmidt_parameter(a)
    if space.modes != 2 or space.aux_dim != 1:
        raise StructureError("tmsv_fock needs a two-mode bosonic space")
    N = space.cutoff
    v = np.zeros((N + 1, N + 1), dtype=np.complex128)
    v[np.arange(N + 1), np.arange(N + 1)] = math.sqrt(1.0 - lam * lam) * lam ** np.arange(N + 1)
    return FockState(space, v.ravel(), float(lam ** (2 * (N + 1))))


def tensor(*ops: FockOperator) -> FockOperator:
    """Tensor product of operators; bosonic modes concatenate, finite factors multiply.

    Only the last factor may carry an ``aux_dim`` > 1 so that the mode-first
    ordering of the result stays valid.
    """
    if any(op.space.aux_dim != 1 for op in ops[:-1]):
        raise StructureError("only the last factor may have a finite auxiliary dimension")
    cutoffs = {op.space.cutoff for op in ops if op.space.modes}
    if len(cutoffs) > 1:
        raise StructureError("all bosonic factors must share the same cutoff")
    cutoff = cutoffs.pop() if cutoffs else ops[0].space.cutoff
    m = ops[0].matrix
    for op in ops[1:]:
        m = np.kron(m, op.matrix)
    space = FockSpace(sum(op.space.modes for op in ops), cutoff, ops[-1].space.aux_dim)
    return FockOperator(space, m, hermitian=all(op.hermitian for op in ops),
                        truncation_loss=float(sum(op.truncation_loss for op in ops)))


def finite_operator(matrix, hermitian: bool = True) -> FockOperator:
    """Wrap a plain matrix as an operator on a finite (non-bosonic) system."""
    m = np.asarray(matrix, dtype=np.complex128)
    return FockOperator(FockSpace(0, 1, m.shape[0]), m, hermitian=hermitian)


def partial_trace_modes(rho: FockOperator, a_modes: int) -> FockOperator:
    """Trace out the first ``a_modes`` modes."""
    dA, rest = rho.space.split(a_modes)
    dB = rest.dim
    r4 = rho.matrix.reshape(dA, dB, dA, dB)
    return FockOperator(rest, np.einsum("ibic->bc", r4), hermitian=rho.hermitian, truncation_loss=rho.truncation_loss)


def keep_first_modes(rho: FockOperator, a_modes: int) -> FockOperator:
    """Trace out everything after the first ``a_modes`` modes."""
    dA, rest = rho.space.split(a_modes)
    dB = rest.dim
    r4 = rho.matrix.reshape(dA, dB, dA, dB)
    return FockOperator(FockSpace(a_modes, rho.space.cutoff), np.einsum("ibjb->ij", r4), hermitian=rho.hermitian,
                        truncation_loss=rho.truncation_loss)


# ---------------------------------------------------------------------------
# heterodyne conditioning


def conditional_batch(rho: FockOperator, z) -> np.ndarray:
    """<z|rho|z> on B for a batch of points z with shape (n, M_A)."""
    z = np.atleast_2d(np.asarray(z, dtype=np.complex128))
    a_modes = z.shape[1]
    dA, rest = rho.space.split(a_modes)
    coh = _multimode_coherent(z, rho.space.cutoff)
    r4 = rho.matrix.reshape(dA, rest.dim, dA, rest.dim)
    return _kernels.conditional_operators(r4, coh)


def heterodyne_condition(rho_AB: FockOperator, z) -> FockOperator:
    """Unnormalized conditional operator <z|rho_AB|z> on B (A = the first len(z) modes)."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    _, rest = rho_AB.space.split(z.size)
    q = conditional_batch(rho_AB, z[None, :])[0]
    return FockOperator(rest, q, hermitian=True, truncation_loss=rho_AB.truncation_loss)


def amplified_conditional(rho_AB: FockOperator, z, kappa: float) -> FockOperator:
    """Conditional operator of the amplified state, via <z|A_k(rho)|z> = k^-M <z/sqrt(k)|rho|z/sqrt(k)>."""
    kappa = float(kappa)
    if not kappa >= 1.0:
        raise DomainError(f"amplifier gain must be >= 1, got {kappa}")
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    q = heterodyne_condition(rho_AB, z / math.sqrt(kappa))
    return FockOperator(q.space, q.matrix / kappa ** z.size, hermitian=True, truncation_loss=q.truncation_loss)


# ---------------------------------------------------------------------------
# entropies and second moments


def _hermitian_spectrum(matrix: np.ndarray) -> np.ndarray:
    lam = np.linalg.eigvalsh(matrix)
    if lam.size and lam[0] < -NEG_EIG_TOL:
        raise PhysicalityError(f"operator has eigenvalue {lam[0]:.3e} below -{NEG_EIG_TOL}")
    return np.clip(lam, 0.0, None)


def matrix_entropy(rho: FockOperator | np.ndarray, normalize: bool = True) -> float:
    """-Tr rho ln rho with 0 ln 0 = 0; ``normalize`` divides rho by its trace first."""
    m = rho.matrix if isinstance(rho, FockOperator) else np.asarray(rho, dtype=np.complex128)
    lam = _hermitian_spectrum(m)
    if normalize:
        tr = lam.sum()
        if tr <= 0:
            raise PhysicalityError("operator has zero trace")
        lam = lam / tr
    return float(_kernels.neg_xlogx_sum(lam[None, :])[0])


def _ladder(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1)), 1).astype(np.complex128)


def quadrature_operators(space: FockSpace) -> list[np.ndarray]:
    """Q_1, P_1, ..., Q_M, P_M on the truncated space (vacuum variance 1/2)."""
    a1 = _ladder(space.cutoff)
    d = space.cutoff + 1
    ops = []
    for i in range(space.modes):
        left = np.eye(d ** i)
        right = np.eye(d ** (space.modes - i - 1) * space.aux_dim)
        a = np.kron(np.kron(left, a1), right)
        ops.append((a + a.conj().T) / math.sqrt(2.0))
        ops.append((a - a.conj().T) / (1j * math.sqrt(2.0)))
    return ops


def covariance_matrix(psi: FockState | FockOperator) -> np.ndarray:
    """Symmetrized second moments (first moments assumed zero)."""
    rho = psi.density() if isinstance(psi, FockState) else psi
    R = quadrature_operators(rho.space)
    n = len(R)
    sigma = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            v = 0.5 * np.trace(rho.matrix @ (R[i] @ R[j] + R[j] @ R[i])).real
            sigma[i, j] = sigma[j, i] = v
    return sigma


# ---------------------------------------------------------------------------
# concave test functions


ConcaveFn = Callable[[np.ndarray], np.ndarray]


def neg_xlogx(x):
    """-x ln x, continuously extended by 0 at x = 0."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, -x * np.log(safe), 0.0)


def x_one_minus_x(x):
    x = np.asarray(x, dtype=float)
    return x * (1.0 - x)


@dataclass(frozen=True)
class PiecewiseLinearConcave:
    """Concave piecewise-linear function on [0, 1] through (knots[i], values[i])."""

    knots: tuple
    values: tuple

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k[0] != 0.0 or k[-1] != 1.0 or np.any(np.diff(k) <= 0):
            raise DomainError("knots must increase from 0 to 1")
        slopes = np.diff(v) / np.diff(k)
        if np.any(np.diff(slopes) > 1e-12):
            raise DomainError("slopes must be non-increasing for a concave function")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.asarray(self.knots)
        v = np.asarray(self.values)
        inner = np.interp(x, k, v)
        # linear extension outside [0, 1] keeps concavity for round-off excursions
        lo = v[0] + (v[1] - v[0]) / (k[1] - k[0]) * x
        hi = v[-1] + (v[-1] - v[-2]) / (k[-1] - k[-2]) * (x - 1.0)
        return np.where(x < 0, lo, np.where(x > 1, hi, inner))


def random_concave(rng: np.random.Generator, pieces: int | None = None) -> PiecewiseLinearConcave:
    """Random concave piecewise-linear f with f(0), f(1) >= 0."""
    if pieces is None:
        pieces = int(rng.integers(1, 6))
    inner = np.sort(rng.uniform(0.02, 0.98, size=pieces - 1))
    knots = np.concatenate([[0.0], inner, [1.0]])
    slopes = np.sort(rng.normal(0.0, 2.0, size=pieces))[::-1]
    values = np.concatenate([[0.0], np.cumsum(slopes * np.diff(knots))])
    values = values + rng.uniform(0.0, 0.5)
    if values[-1] < 0:
        values = values - values[-1]
    if values[0] < 0:  # pragma: no cover - only if the shift above went negative
        values = values - values[0]
    return PiecewiseLinearConcave(tuple(knots), tuple(values))


def apply_function(f: ConcaveFn, matrix: np.ndarray) -> np.ndarray:
    """f(H) for a Hermitian matrix H via its eigendecomposition."""
    lam, U = np.linalg.eigh(matrix)
    return (U * f(lam)) @ U.conj().T


# ---------------------------------------------------------------------------
# inequality checkers


@dataclass(frozen=True)
class InequalityCheck:
    """Outcome of a trace-inequality check ``lhs >= rhs - tolerance``."""

    lhs: float
    rhs: float
    tolerance: float

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs - self.tolerance

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs

    def __iter__(self):
        yield self.lhs
        yield self.rhs


def random_tight_frame(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` vectors (columns) in C^dim with sum |phi_k><phi_k| = I."""
    V = rng.normal(size=(dim, count)) + 1j * rng.normal(size=(dim, count))
    lam, U = np.linalg.eigh(V @ V.conj().T)
    return (U / np.sqrt(lam)) @ U.conj().T @ V


def jensen_check(frame, a, f: ConcaveFn, tol: float = 1e-8) -> InequalityCheck:
    """Tr f(sum_k a_k |phi_k><phi_k|) >= sum_k f(a_k) <phi_k|phi_k>; ``frame`` holds the vectors as columns."""
    F = np.asarray(frame, dtype=np.complex128)
    if F.ndim == 2 and F.shape[0] != len(a) and F.shape[1] != len(a):
        raise StructureError("frame and coefficient list have different lengths")
    if F.shape[1] != len(a):
        F = F.T
    a = np.asarray(a, dtype=float)
    if np.any(a < 0) or np.any(a > 1):
        raise PreconditionError("coefficients must lie in [0, 1]")
    completeness = F @ F.conj().T
    if np.max(np.abs(completeness - np.eye(F.shape[0]))) > 1e-8:
        raise PreconditionError("frame does not resolve the identity")
    A = (F * a) @ F.conj().T
    lhs = float(np.sum(f(np.linalg.eigvalsh(0.5 * (A + A.conj().T)))))
    rhs = float(np.sum(f(a) * np.sum(np.abs(F) ** 2, axis=0)))
    return InequalityCheck(lhs, rhs, tol)


def _berezin_lieb_lhs(X: FockOperator, f0: ConcaveFn, grid: QuadratureGrid) -> float:
    q = conditional_batch(X, grid.nodes)
    lam = np.linalg.eigvalsh(q)
    return grid.integrate(np.sum(f0(lam), axis=-1))


def berezin_lieb_check(X: FockOperator, f: ConcaveFn, grid: QuadratureGrid) -> InequalityCheck:
    """int Tr_B f(<z|X|z>) d^{2M}z/pi^M  >=  Tr f(X), with A = the first ``grid.M`` modes.

    Both sides are evaluated for f - f(0): the constant part contributes
    f(0) Tr I to each side (resolution of the identity) and is infinite on
    the untruncated space, so it is cancelled analytically. The tolerance is
    the grid budget plus the change of the left side under order doubling.
    """
    lam = np.linalg.eigvalsh(X.matrix)
    if lam[0] < -1e-9 or lam[-1] > 1 + 1e-9:
        raise PreconditionError(f"spectrum of X must lie in [0, 1], got [{lam[0]:.3e}, {lam[-1]:.3e}]")
    f0_val = float(f(np.array([0.0]))[0])

    def f0(x):
        return f(np.clip(x, 0.0, 1.0)) - f0_val

    rhs = float(np.sum(f0(np.clip(lam, 0.0, 1.0))))
    lhs = _berezin_lieb_lhs(X, f0, grid)
    lhs_fine = _berezin_lieb_lhs(X, f0, grid.refined())
    return InequalityCheck(lhs, rhs, grid.error_budget + abs(lhs_fine - lhs))


def random_contraction(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random Hermitian matrix with spectrum in [0, 1]."""
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    Q, _ = np.linalg.qr(G)
    lam = rng.uniform(0.0, 1.0, size=dim)
    return (Q * lam) @ Q.conj().T
