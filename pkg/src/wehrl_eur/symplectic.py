"""Covariance-matrix calculus for zero-mean Gaussian states.

Conventions: quadratures are ordered (Q1, P1, Q2, P2, ...), hbar = 1 and the
vacuum has covariance ``0.5 * I``. Entropies are in nats.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NumericalError, PhysicalityError, StructureError

PHYS_TOL = 1e-9
SYM_TOL = 1e-10


# ---------------------------------------------------------------------------
# partitions and the symplectic form


@dataclass(frozen=True)
class ModePartition:
    """Ordered named subsystems, each made of a number of bosonic modes."""

    subsystems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        subs = tuple((str(label), int(modes)) for label, modes in self.subsystems)
        labels = [label for label, _ in subs]
        if len(set(labels)) != len(labels):
            raise StructureError(f"duplicate subsystem labels in {labels}")
        if not subs:
            raise StructureError("a partition needs at least one subsystem")
        for label, modes in subs:
            if modes < 1:
                raise StructureError(f"subsystem {label!r} must have a positive number of modes")
        object.__setattr__(self, "subsystems", subs)

    @classmethod
    def of(cls, **modes: int) -> "ModePartition":
        """``ModePartition.of(A=1, B=2)``; keyword order fixes the mode order."""
        return cls(tuple(modes.items()))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.subsystems)

    @property
    def total_modes(self) -> int:
        return sum(m for _, m in self.subsystems)

    def modes(self, label: str) -> int:
        for lab, m in self.subsystems:
            if lab == label:
                return m
        raise StructureError(f"unknown subsystem label {label!r}; known: {self.labels}")

    def mode_indices(self, labels: Iterable[str]) -> list[int]:
        """Zero-based mode indices of the given subsystems, in the requested order."""
        offsets = {}
        start = 0
        for lab, m in self.subsystems:
            offsets[lab] = (start, m)
            start += m
        out = []
        for lab in _as_labels(labels):
            if lab not in offsets:
                raise StructureError(f"unknown subsystem label {lab!r}; known: {self.labels}")
            s, m = offsets[lab]
            out.extend(range(s, s + m))
        return out

    def quadrature_indices(self, labels: Iterable[str]) -> np.ndarray:
        modes = self.mode_indices(labels)
        return np.array([q for i in modes for q in (2 * i, 2 * i + 1)], dtype=int)

    def restrict(self, labels: Iterable[str]) -> "ModePartition":
        return ModePartition(tuple((lab, self.modes(lab)) for lab in _as_labels(labels)))

    def to_list(self) -> list[dict]:
        return [{"label": lab, "modes": m} for lab, m in self.subsystems]


def _as_labels(labels) -> list[str]:
    if isinstance(labels, str):
        return [labels]
    return list(labels)


@lru_cache(maxsize=32)
def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form with blocks [[0, 1], [-1, 0]] (cached, read-only)."""
    D = np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    D.setflags(write=False)
    return D


# ---------------------------------------------------------------------------
# the bosonic entropy function


def g(x):
    """Entropy of a thermal mode with mean photon number ``x``: (x+1)ln(x+1) - x ln x."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"g is defined for x >= 0, got {x!r}")
    pos = arr > 0
    safe = np.where(pos, arr, 1.0)
    # x ln(1 + 1/x), split so that neither branch overflows
    with np.errstate(divide="ignore"):
        tail = np.where(safe < 1.0, safe * (np.log1p(safe) - np.log(safe)), safe * np.log1p(1.0 / np.maximum(safe, 1.0)))
    out = np.where(pos, np.log1p(safe) + tail, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def g_inverse(y: float) -> float:
    """Inverse of :func:`g` on [0, inf)."""
    y = float(y)
    if y < 0 or math.isnan(y):
        raise DomainError(f"g_inverse is defined for y >= 0, got {y!r}")
    if y == 0.0:
        return 0.0
    hi = max(1.0, math.exp(y - 1.0))
    while g(hi) < y:
        hi *= 2.0
    x = brentq(lambda t: g(t) - y, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    # one Newton polish step; g'(x) = ln(1 + 1/x)
    if x > 0:
        step = (g(x) - y) / math.log1p(1.0 / x)
        if x - step > 0 and abs(g(x - step) - y) < abs(g(x) - y):
            x -= step
    return float(x)


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    min_eigenvalue: float

    def __bool__(self):
        return self.valid


class GaussianState:
    """Zero-mean Gaussian state described by its covariance matrix over a partition."""

    __slots__ = ("partition", "sigma")

    def __init__(self, partition: ModePartition | Sequence, sigma):
        if not isinstance(partition, ModePartition):
            partition = ModePartition(tuple(partition))
        sigma = np.array(sigma, dtype=np.float64)
        n = 2 * partition.total_modes
        if sigma.ndim == 1 and sigma.size == n * n:
            sigma = sigma.reshape(n, n)
        if sigma.shape != (n, n):
            raise StructureError(f"sigma has shape {sigma.shape}, partition needs ({n}, {n})")
        if not np.all(np.isfinite(sigma)):
            raise StructureError("sigma contains non-finite entries")
        scale = max(1.0, float(np.max(np.abs(sigma))))
        if np.max(np.abs(sigma - sigma.T)) > SYM_TOL * scale:
            raise StructureError("sigma is not symmetric")
        sigma = 0.5 * (sigma + sigma.T)
        sigma.setflags(write=False)
        self.partition = partition
        self.sigma = sigma

    @classmethod
    def _trusted(cls, partition: ModePartition, sigma: np.ndarray) -> "GaussianState":
        # internal constructor for matrices that are symmetric by construction
        obj = object.__new__(cls)
        sigma = np.array(sigma, dtype=np.float64)
        sigma.setflags(write=False)
        obj.partition = partition
        obj.sigma = sigma
        return obj

    @property
    def n_modes(self) -> int:
        return self.partition.total_modes

    def __repr__(self):
        return f"GaussianState(partition={self.partition.to_list()}, sigma=<{self.sigma.shape[0]}x{self.sigma.shape[0]}>)"

    def to_dict(self) -> dict:
        return {"partition": self.partition.to_list(), "sigma": [float(v) for v in self.sigma.ravel()]}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianState":
        try:
            parts = tuple((p["label"], p["modes"]) for p in data["partition"])
            sigma = data["sigma"]
        except (KeyError, TypeError) as exc:
            raise StructureError(f"malformed state document: {exc}") from None
        return cls(ModePartition(parts), np.asarray(sigma, dtype=np.float64))

    @classmethod
    def from_json(cls, text: str) -> "GaussianState":
        return cls.from_dict(json.loads(text))


def validate(state: GaussianState) -> ValidityReport:
    """Physicality check: sigma + (i/2) Delta must be positive semidefinite."""
    n = state.n_modes
    herm = state.sigma + 0.5j * symplectic_form(n)
    lam = float(np.linalg.eigvalsh(herm)[0])
    return ValidityReport(lam >= -PHYS_TOL, lam)


def _require_physical(state: GaussianState) -> None:
    report = validate(state)
    if not report.valid:
        raise PhysicalityError(
            f"covariance violates the uncertainty principle (min eigenvalue of sigma + i Delta/2 = {report.min_eigenvalue:.3e})"
        )


def _sym_eigs(sigma: np.ndarray) -> np.ndarray:
    n = sigma.shape[0] // 2
    delta = symplectic_form(n)
    lam, U = np.linalg.eigh(sigma)
    if lam[0] > 0:
        root = (U * np.sqrt(lam)) @ U.T
        ev = np.linalg.eigvalsh(root @ (1j * delta) @ root)
        nu = ev[n:]
    else:
        ev = np.abs(np.linalg.eigvals(sigma @ delta.T))
        nu = np.sort(ev)[::2]
    return np.sort(nu)[::-1]


def symplectic_eigenvalues(state: GaussianState) -> np.ndarray:
    """Symplectic eigenvalues, one per mode, in descending order."""
    sigma = state.sigma if isinstance(state, GaussianState) else np.asarray(state, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] % 2:
        raise StructureError(f"need a square matrix of even dimension, got shape {sigma.shape}")
    return _sym_eigs(sigma)


def entropy_from_symplectic(nu) -> float:
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 0.5 - PHYS_TOL):
        raise PhysicalityError(f"symplectic eigenvalue below 1/2: {nu.min():.12g}")
    return float(np.sum(g(np.clip(nu - 0.5, 0.0, None))))


def von_neumann_entropy(state: GaussianState) -> float:
    """Von Neumann entropy sum_i g(nu_i - 1/2), in nats."""
    return entropy_from_symplectic(symplectic_eigenvalues(state))


def marginal(state: GaussianState, labels) -> GaussianState:
    labels = _as_labels(labels)
    if not labels:
        raise StructureError("marginal needs at least one subsystem label")
    idx = state.partition.quadrature_indices(labels)
    return GaussianState._trusted(state.partition.restrict(labels), state.sigma[np.ix_(idx, idx)])


def _check_disjoint(*groups) -> None:
    seen = set()
    for grp in groups:
        for lab in grp:
            if lab in seen:
                raise StructureError(f"subsystem {lab!r} appears in more than one group")
            seen.add(lab)


def conditional_entropy(state: GaussianState, A, B) -> float:
    """S(A|B) = S(AB) - S(B)."""
    A, B = _as_labels(A), _as_labels(B)
    _check_disjoint(A, B)
    s_ab = von_neumann_entropy(marginal(state, A + B))
    s_b = von_neumann_entropy(marginal(state, B)) if B else 0.0
    return s_ab - s_b


# ---------------------------------------------------------------------------
# channels and state families


def amplifier(state: GaussianState, target: str, kappa: float) -> GaussianState:
    """Quantum-limited amplifier with gain ``kappa`` acting on every mode of ``target``."""
    kappa = float(kappa)
    if not kappa >= 1.0:
        raise DomainError(f"amplifier gain must be >= 1, got {kappa}")
    idx = state.partition.quadrature_indices([target])
    # scale rows and columns of the target by sqrt(kappa), then add the noise term
    d = np.ones(state.sigma.shape[0])
    d[idx] = math.sqrt(kappa)
    sigma = d[:, None] * state.sigma * d[None, :]
    sigma[idx, idx] += 0.5 * (kappa - 1.0)
    return GaussianState._trusted(state.partition, sigma)


def vacuum(partition: ModePartition) -> GaussianState:
    return GaussianState(partition, 0.5 * np.eye(2 * partition.total_modes))


def thermal(nu: float | Sequence[float], label: str = "A") -> GaussianState:
    """Product of thermal modes with symplectic eigenvalues ``nu`` (mean photon number nu - 1/2)."""
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    if np.any(nu < 0.5):
        raise DomainError("thermal symplectic eigenvalues must be >= 1/2")
    return GaussianState(ModePartition(((label, nu.size),)), np.diag(np.repeat(nu, 2)))


def product(*states: GaussianState) -> GaussianState:
    parts = tuple(p for s in states for p in s.partition.subsystems)
    n = sum(s.sigma.shape[0] for s in states)
    sigma = np.zeros((n, n))
    k = 0
    for s in states:
        d = s.sigma.shape[0]
        sigma[k:k + d, k:k + d] = s.sigma
        k += d
    return GaussianState(ModePartition(parts), sigma)


def two_mode_squeezed(a: float, M: int = 1) -> GaussianState:
    """M copies of the two-mode squeezed vacuum; A holds modes 1..M, B modes M+1..2M."""
    a = float(a)
    if not a >= 1.0:
        raise DomainError(f"two-mode squeezing parameter must satisfy a >= 1, got {a}")
    return _paired_state(0.5 * a, 0.5 * math.sqrt(a * a - 1.0), 0.5 * a, M)


def optimal_sequence_state(s: float, a: float, M: int = 1) -> GaussianState:
    """Two-mode squeezed state with the amplifier of gain exp(s/M) + 1 applied to A."""
    kappa = math.exp(s / M) + 1.0
    return amplifier(two_mode_squeezed(a, M), "A", kappa)


def _paired_state(x: float, c: float, y: float, M: int) -> GaussianState:
    M = int(M)
    if M < 1:
        raise DomainError("number of modes must be positive")
    sz = np.diag([1.0, -1.0])
    sigma = np.zeros((4 * M, 4 * M))
    for i in range(M):
        qa = slice(2 * i, 2 * i + 2)
        qb = slice(2 * (M + i), 2 * (M + i) + 2)
        sigma[qa, qa] = x * np.eye(2)
        sigma[qb, qb] = y * np.eye(2)
        sigma[qa, qb] = c * sz
        sigma[qb, qa] = c * sz
    return GaussianState(ModePartition.of(A=M, B=M), sigma)


# ---------------------------------------------------------------------------
# Williamson normal form and purification


@dataclass(frozen=True)
class WilliamsonDecomposition:
    """sigma = S diag(nu_1, nu_1, ..., nu_M, nu_M) S^T with S symplectic."""

    S: np.ndarray
    nu: np.ndarray

    def diagonal(self) -> np.ndarray:
        return np.diag(np.repeat(self.nu, 2))


def williamson(state: GaussianState) -> WilliamsonDecomposition:
    sigma = state.sigma if isinstance(state, GaussianState) else np.asarray(state, dtype=float)
    n = sigma.shape[0] // 2
    lam, U = np.linalg.eigh(sigma)
    if lam[0] <= 1e-14 * max(1.0, lam[-1]):
        raise NumericalError("Williamson decomposition needs a positive definite covariance matrix")
    root = (U * np.sqrt(lam)) @ U.T
    inv_root = (U / np.sqrt(lam)) @ U.T
    # K = sigma^{-1/2} Delta sigma^{-1/2} is antisymmetric with eigenvalues +-i/nu.
    K = inv_root @ symplectic_form(n) @ inv_root
    K = 0.5 * (K - K.T)
    w, V = np.linalg.eigh(1j * K)
    pos = w[n:]
    vecs = V[:, n:]
    O = np.empty((2 * n, 2 * n))
    O[:, 0::2] = math.sqrt(2.0) * vecs.imag
    O[:, 1::2] = math.sqrt(2.0) * vecs.real
    nu = 1.0 / pos
    order = np.argsort(-nu, kind="stable")
    nu = nu[order]
    cols = np.array([[2 * k, 2 * k + 1] for k in order]).ravel()
    O = O[:, cols]
    S = root @ O @ np.diag(np.repeat(1.0 / np.sqrt(nu), 2))
    return WilliamsonDecomposition(S, nu)


def purification(state: GaussianState, label: str = "C") -> GaussianState:
    """Pure Gaussian state on the original subsystems plus a copy ``label`` of all modes."""
    if label in state.partition.labels:
        raise StructureError(f"label {label!r} already used by the partition")
    wd = williamson(state)
    n = state.n_modes
    cross = np.zeros((2 * n, 2 * n))
    for i, v in enumerate(wd.nu):
        c = math.sqrt(max(v * v - 0.25, 0.0))
        cross[2 * i, 2 * i] = c
        cross[2 * i + 1, 2 * i + 1] = -c
    off = wd.S @ cross @ wd.S.T
    off = 0.5 * (off + off.T)
    sigma = np.block([[state.sigma, off], [off, state.sigma]])
    partition = ModePartition(state.partition.subsystems + ((label, n),))
    return GaussianState(partition, sigma)


# ---------------------------------------------------------------------------
# random states


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _embed_single(S_local: np.ndarray, mode: int, n: int) -> np.ndarray:
    S = np.eye(2 * n)
    S[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2] = S_local
    return S


def _beam_splitter(theta: float, i: int, j: int, n: int) -> np.ndarray:
    S = np.eye(2 * n)
    c, s = math.cos(theta), math.sin(theta)
    for q in (0, 1):
        a, b = 2 * i + q, 2 * j + q
        S[a, a] = c
        S[a, b] = s
        S[b, a] = -s
        S[b, b] = c
    return S


def symplectic_from_parameters(n: int, squeeze_in, phases_in, bs_angles, phases_out, squeeze_out) -> np.ndarray:
    """Squeeze, rotate, mix every mode pair with a beam splitter, rotate and squeeze again."""
    S = np.eye(2 * n)
    for i in range(n):
        S = _embed_single(np.diag([math.exp(-squeeze_in[i]), math.exp(squeeze_in[i])]), i, n) @ S
    for i in range(n):
        S = _embed_single(_rotation(phases_in[i]), i, n) @ S
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            S = _beam_splitter(bs_angles[k], i, j, n) @ S
            k += 1
    for i in range(n):
        S = _embed_single(_rotation(phases_out[i]), i, n) @ S
    for i in range(n):
        S = _embed_single(np.diag([math.exp(-squeeze_out[i]), math.exp(squeeze_out[i])]), i, n) @ S
    return S


def n_parameters(n: int) -> int:
    """Length of the flat parameter vector accepted by :func:`state_from_parameters`."""
    return n + 4 * n + n * (n - 1) // 2


def state_from_parameters(params, partition: ModePartition) -> GaussianState:
    """Map an unconstrained real vector to a valid Gaussian state.

    Layout: n thermal parameters (nu = 1/2 + exp(p)), then input squeezings,
    input phases, beam-splitter angles, output phases, output squeezings.
    """
    n = partition.total_modes
    p = np.asarray(params, dtype=float)
    if p.size != n_parameters(n):
        raise StructureError(f"expected {n_parameters(n)} parameters, got {p.size}")
    nu = 0.5 + np.exp(np.clip(p[:n], -50, 50))
    k = n
    sq_in = p[k:k + n]; k += n
    ph_in = p[k:k + n]; k += n
    nbs = n * (n - 1) // 2
    bs = p[k:k + nbs]; k += nbs
    ph_out = p[k:k + n]; k += n
    sq_out = p[k:k + n]
    S = symplectic_from_parameters(n, sq_in, ph_in, bs, ph_out, sq_out)
    return GaussianState(partition, S @ np.diag(np.repeat(nu, 2)) @ S.T)


def random_state(M: int, seed: int, max_nu: float = 2.0, max_squeeze: float = 1.0,
                 partition: ModePartition | None = None) -> GaussianState:
    """Seeded random Gaussian state S diag(nu) S^T on ``M`` modes."""
    if max_nu < 0.5:
        raise DomainError("max_nu must be >= 1/2")
    if max_squeeze < 0:
        raise DomainError("max_squeeze must be >= 0")
    if partition is None:
        partition = ModePartition((("A", int(M)),))
    elif partition.total_modes != M:
        raise StructureError(f"partition has {partition.total_modes} modes, expected {M}")
    n = int(M)
    rng = np.random.default_rng(seed)
    nu = rng.uniform(0.5, max_nu, size=n)
    sq_in = rng.uniform(-max_squeeze, max_squeeze, size=n)
    ph_in = rng.uniform(0, 2 * math.pi, size=n)
    bs = rng.uniform(0, 2 * math.pi, size=n * (n - 1) // 2)
    ph_out = rng.uniform(0, 2 * math.pi, size=n)
    sq_out = rng.uniform(-max_squeeze, max_squeeze, size=n)
    S = symplectic_from_parameters(n, sq_in, ph_in, bs, ph_out, sq_out)
    return GaussianState(partition, S @ np.diag(np.repeat(nu, 2)) @ S.T)


def partial_transpose(state: GaussianState, labels) -> GaussianState:
    """Flip the sign of every P quadrature of ``labels`` (transpose at the covariance level)."""
    idx = state.partition.quadrature_indices(labels)
    flip = np.ones(state.sigma.shape[0])
    flip[idx[1::2]] = -1.0
    return GaussianState(state.partition, state.sigma * np.outer(flip, flip))
