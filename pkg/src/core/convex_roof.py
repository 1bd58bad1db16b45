"""
Convex Roof - Bộ giải số cho convex roof của độ đo đa thức

C_p(ρ) = min Σ_i p_i C_p(ψ_i) trên mọi phân tách ρ = Σ_i p_i |ψ_i><ψ_i|

Strategy:
- Phân tách được tham số hoá bởi isometry V (n x r): sqrt(p_i) ψ_i = Σ_k V_ik sqrt(λ_k) e_k
- Restart: isometry Haar (seed riêng cho từng restart), kích thước luân phiên theo size_ladder
- Refine: L-BFGS (scipy) trên V = X (X†X)^(-1/2), hàm mục tiêu làm trơn
  |P|² + ε|w|^(2h) với ε giảm dần để tiến tới các điểm biên độ bằng 0
- Giá trị trả về luôn đi kèm phân tách chứng minh (upper bound kiểm tra được)
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from src.core.errors import (
    DimensionMismatch,
    InvalidState,
    NotAnIsometry,
    PreconditionError,
    RankDeficientSpectrumMismatch,
)
from src.core.poly_measure import HomogeneousPolynomial, evaluate, weighted_measure
from src.core.quantum_state import (
    JACOBI_MAX_SWEEPS,
    DensityMatrix,
    PureState,
    Spectrum,
    eig_hermitian,
    validate_density,
)
from src.core.sampling import haar_unitary
from src.utils.workers import derive_rng, run_ordered

logger = logging.getLogger("CoherenceKit.ConvexRoof")

# Tham số cấu hình cố định ở đầu file
PROBABILITY_TOLERANCE = 1e-10
DROP_PROBABILITY = 1e-14
RANK_THRESHOLD = 1e-12
ISOMETRY_TOLERANCE = 1e-9
NORM_FLOOR = 1e-300
GRAM_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class Decomposition:
    """
    Phân tách thuần {p_i, ψ_i} của một ma trận mật độ.
    """
    probabilities: np.ndarray
    states: Tuple[PureState, ...]

    def __post_init__(self):
        probs = np.array(self.probabilities, dtype=float).reshape(-1)
        states = tuple(self.states)
        if probs.size == 0 or probs.size != len(states):
            raise InvalidState(f"Decomposition needs matching non-empty lists ({probs.size} probabilities, {len(states)} states)")
        if np.any(probs < 0):
            raise InvalidState("Decomposition has negative probabilities")
        if abs(float(np.sum(probs)) - 1.0) > PROBABILITY_TOLERANCE:
            raise InvalidState(f"Probabilities sum to {float(np.sum(probs)):.15g}, expected 1")
        if len({psi.dim for psi in states}) != 1:
            raise DimensionMismatch("Decomposition states have different dimensions")
        probs.setflags(write=False)
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "states", states)

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def rows(self) -> np.ndarray:
        """Ma trận n x d với hàng i = sqrt(p_i) ψ_i."""
        amplitudes = np.array([psi.amplitudes for psi in self.states])
        return np.sqrt(self.probabilities)[:, None] * amplitudes

    def density(self) -> np.ndarray:
        """Σ p_i |ψ_i><ψ_i|"""
        rows = self.rows()
        return rows.T @ rows.conj()

    def reconstruction_error(self, rho: DensityMatrix) -> float:
        return float(np.max(np.abs(self.density() - rho.entries)))

    @classmethod
    def from_rows(cls, rows: np.ndarray, drop_below: float = DROP_PROBABILITY) -> "Decomposition":
        """
        Tạo phân tách từ các hàng chưa chuẩn hoá; bỏ các hàng có p_i < drop_below.
        """
        rows = np.asarray(rows, dtype=complex)
        probs = np.sum(np.abs(rows) ** 2, axis=1)
        keep = probs >= drop_below
        states = tuple(PureState(row / math.sqrt(p)) for row, p in zip(rows[keep], probs[keep]))
        return cls(probs[keep], states)

    def to_dict(self) -> Dict[str, Any]:
        """{"probabilities": [...], "states": [[[re, im], ...], ...]}"""
        return {
            "probabilities": [float(p) for p in self.probabilities],
            "states": [[[float(a.real), float(a.imag)] for a in psi.amplitudes] for psi in self.states],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Decomposition":
        states = [PureState(np.array([complex(re, im) for re, im in amps])) for amps in data["states"]]
        return cls(np.array(data["probabilities"], dtype=float), tuple(states))


@dataclass(frozen=True)
class SolverConfig:
    """
    Tham số của bộ giải convex roof.

    smoothing: dãy ε giảm dần; mỗi giai đoạn chạy tối đa max_iterations bước L-BFGS.
    size_ladder: số hàng thêm vào kích thước gốc, luân phiên theo chỉ số restart
    (chỉ dùng khi decomposition_size không được đặt).
    """
    decomposition_size: Optional[int] = None  # None -> rank + size_margin
    size_margin: int = 2
    size_ladder: Tuple[int, ...] = (0, 2)
    restarts: int = 32
    seed: int = 7
    max_iterations: int = 200
    value_tolerance: float = 1e-15
    gradient_tolerance: float = 1e-12
    smoothing: Tuple[float, ...] = (1e-2, 1e-4, 1e-7, 1e-10, 1e-14, 1e-18)
    eigen_max_sweeps: int = JACOBI_MAX_SWEEPS
    threads: Optional[int] = None

    def __post_init__(self):
        if self.restarts < 1:
            raise PreconditionError(f"restarts must be >= 1, got {self.restarts}")
        if self.decomposition_size is not None and self.decomposition_size < 1:
            raise PreconditionError(f"decomposition_size must be >= 1, got {self.decomposition_size}")
        if self.max_iterations < 1:
            raise PreconditionError(f"max_iterations must be >= 1, got {self.max_iterations}")
        object.__setattr__(self, "smoothing", tuple(float(e) for e in self.smoothing))
        object.__setattr__(self, "size_ladder", tuple(int(k) for k in self.size_ladder))
        if not self.smoothing or any(not e > 0 for e in self.smoothing):
            raise PreconditionError("smoothing needs at least one positive epsilon")
        if not self.size_ladder or any(k < 0 for k in self.size_ladder):
            raise PreconditionError("size_ladder needs at least one non-negative entry")

    def size_for_rank(self, rank: int, restart: int = 0) -> int:
        if self.decomposition_size is not None:
            return self.decomposition_size
        return rank + self.size_margin + self.size_ladder[restart % len(self.size_ladder)]


@dataclass(frozen=True)
class RoofResult:
    """
    Kết quả: giá trị tốt nhất + phân tách chứng minh.
    """
    value: float
    decomposition: Decomposition
    restart_index: int
    restart_values: Tuple[float, ...] = field(default_factory=tuple)


# ===== DECOMPOSITIONS =====

def _isometry_rows(spectrum: Spectrum, V: np.ndarray) -> np.ndarray:
    basis = _spectral_basis(spectrum)
    r = basis.shape[0]
    V = np.asarray(V, dtype=complex)
    if V.ndim != 2 or V.shape[1] != r:
        raise NotAnIsometry(f"Isometry must have {r} columns (rank of the spectrum), got shape {V.shape}")
    deviation = float(np.max(np.abs(V.conj().T @ V - np.eye(r))))
    if deviation > ISOMETRY_TOLERANCE:
        raise NotAnIsometry(f"V†V deviates from identity by {deviation:.3e}")
    return V @ basis


def decomposition_from_isometry(spectrum: Spectrum, V: np.ndarray) -> Decomposition:
    """
    sqrt(p_i) ψ_i = Σ_k V_ik sqrt(λ_k) e_k

    Raises:
        NotAnIsometry
    """
    return Decomposition.from_rows(_isometry_rows(spectrum, V))


def average_measure(dec: Decomposition, P: HomogeneousPolynomial, scale: float = 1.0) -> float:
    """Σ_i p_i C_p(ψ_i)"""
    return float(sum(p * evaluate(P, psi, scale) for p, psi in zip(dec.probabilities, dec.states)))


# ===== OPTIMISATION =====

def _spectral_basis(spectrum: Spectrum) -> np.ndarray:
    """B (r x d) với hàng k = sqrt(λ_k) e_k^T; mọi phân tách có dạng W = V B."""
    lam = spectrum.eigenvalues
    r = int(np.count_nonzero(lam > RANK_THRESHOLD))
    return np.sqrt(lam[:r])[:, None] * spectrum.eigenvectors[:, :r].T


def _pack(X: np.ndarray) -> np.ndarray:
    return np.concatenate([X.real.ravel(), X.imag.ravel()])


def _unpack(x: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    half = shape[0] * shape[1]
    return (x[:half] + 1j * x[half:]).reshape(shape)


def _polar(X: np.ndarray) -> np.ndarray:
    """Isometry gần X nhất (thừa số polar)."""
    u, _, vh = np.linalg.svd(X, full_matrices=False)
    return u @ vh


def _smoothed_rows(P: HomogeneousPolynomial, scale: float, W: np.ndarray, eps: float):
    """
    Đóng góp đã làm trơn của từng hàng và gradient Wirtinger ∂/∂w̄.

    F_ε(w) = scale |w|^(2 - h m) (|P(w)|² + ε |w|^(2h))^(m/2); ε → 0 cho lại p C_p(ψ).
    """
    h, m = P.degree, P.power
    a = 1.0 - 0.5 * h * m
    norms_sq = np.sum(np.abs(W) ** 2, axis=1)
    values = np.zeros(W.shape[0])
    grad = np.zeros(W.shape, dtype=complex)
    live = norms_sq > NORM_FLOOR
    if not live.any():
        return values, grad

    w = W[live]
    N = norms_sq[live]
    p = P.value(w)
    q = np.maximum(np.abs(p) ** 2 + eps * N ** h, np.finfo(float).tiny)
    q_m = q ** (0.5 * m)
    q_m1 = q ** (0.5 * m - 1.0)
    values[live] = scale * N ** a * q_m
    coef_w = scale * (a * N ** (a - 1.0) * q_m + 0.5 * m * eps * h * N ** (a + h - 1.0) * q_m1)
    coef_d = scale * 0.5 * m * N ** a * q_m1 * p
    grad[live] = coef_w[:, None] * w + coef_d[:, None] * np.conj(P.gradient(w))
    return values, grad


def _objective(x, shape, basis, P, scale, eps):
    """
    Giá trị và gradient theo X của Σ_i F_ε(hàng i của polar(X) B).

    polar(X) = X S^(-1/2), S = X†X; đạo hàm của S^(-1/2) theo công thức
    Daleckii-Krein trên phổ của S.
    """
    X = _unpack(x, shape)
    s, U = np.linalg.eigh(X.conj().T @ X)
    root = np.sqrt(np.maximum(s, GRAM_FLOOR * max(s[-1], GRAM_FLOOR)))
    M = (U / root[None, :]) @ U.conj().T
    W = X @ M @ basis

    values, grad_w = _smoothed_rows(P, scale, W, eps)
    grad_v = grad_w @ basis.conj().T
    H = U.conj().T @ (X.conj().T @ grad_v) @ U
    gamma = -1.0 / (root[:, None] * root[None, :] * (root[:, None] + root[None, :]))
    C = U @ (H * gamma) @ U.conj().T
    grad_x = grad_v @ M + X @ (C + C.conj().T)
    return float(np.sum(values)), 2.0 * _pack(grad_x)


def _minimize_rows(basis: np.ndarray, V: np.ndarray, P: HomogeneousPolynomial, scale: float,
                   cfg: SolverConfig) -> np.ndarray:
    """
    L-BFGS trên isometry V (tham số hoá polar), làm trơn giảm dần theo cfg.smoothing.

    Trả về các hàng W = V B có giá trị thật (ε = 0) nhỏ nhất trong các giai đoạn.
    """
    X = _polar(np.asarray(V, dtype=complex))
    best_rows = X @ basis
    best = float(np.sum(weighted_measure(P, best_rows, scale)))
    options = {"maxiter": cfg.max_iterations, "ftol": cfg.value_tolerance, "gtol": cfg.gradient_tolerance}
    for eps in cfg.smoothing:
        result = minimize(_objective, _pack(X), args=(X.shape, basis, P, scale, eps),
                          jac=True, method="L-BFGS-B", options=options)
        X = _polar(_unpack(result.x, X.shape))
        rows = X @ basis
        value = float(np.sum(weighted_measure(P, rows, scale)))
        logger.debug("Smoothing %.0e: %d iteration(s), value %.12f", eps, result.nit, value)
        if value < best:
            best, best_rows = value, rows
    return best_rows


def local_refine(dec: Decomposition, P: HomogeneousPolynomial, scale: float, cfg: SolverConfig) -> Decomposition:
    """
    Tinh chỉnh một phân tách có sẵn (giá trị không tăng).
    """
    if P.dim != dec.dim:
        raise DimensionMismatch(f"Polynomial dimension {P.dim} does not match decomposition dimension {dec.dim}")
    spectrum = eig_hermitian(validate_density(dec.density()), cfg.eigen_max_sweeps)
    basis = _spectral_basis(spectrum)
    r = basis.shape[0]
    # V = W B^+ = W conj(E_r) diag(λ^(-1/2))
    V = dec.rows() @ spectrum.eigenvectors[:, :r].conj() / np.sqrt(spectrum.eigenvalues[:r])[None, :]
    candidate = Decomposition.from_rows(_minimize_rows(basis, V, P, scale, cfg))
    if average_measure(candidate, P, scale) <= average_measure(dec, P, scale):
        return candidate
    return dec


def minimize_convex_roof(
    rho: DensityMatrix,
    P: HomogeneousPolynomial,
    scale: float = 1.0,
    cfg: Optional[SolverConfig] = None,
) -> RoofResult:
    """
    Cực tiểu hoá trung bình độ đo trên các phân tách của ρ.

    Giá trị trả về là upper bound của convex roof; kết quả chỉ phụ thuộc
    seed (min theo (giá trị, chỉ số restart)).

    Raises:
        RankDeficientSpectrumMismatch: decomposition_size < rank(ρ)
        PreconditionError: scale <= 0
    """
    cfg = cfg or SolverConfig()
    if P.dim != rho.dim:
        raise DimensionMismatch(f"Polynomial dimension {P.dim} does not match state dimension {rho.dim}")
    if not scale > 0:
        raise PreconditionError(f"scale must be > 0, got {scale}")

    spectrum = eig_hermitian(rho, cfg.eigen_max_sweeps)
    rank = spectrum.rank(RANK_THRESHOLD)
    if rank == 1:
        dec = Decomposition(np.array([1.0]), (PureState(spectrum.eigenvectors[:, 0]),))
        value = average_measure(dec, P, scale)
        return RoofResult(value, dec, 0, (value,))

    size = cfg.size_for_rank(rank)
    if size < rank:
        raise RankDeficientSpectrumMismatch(f"Decomposition size {size} is smaller than rank {rank}")
    basis = _spectral_basis(spectrum)

    def run(index: int) -> Tuple[float, Decomposition]:
        rng = derive_rng(cfg.seed, index)
        V = haar_unitary(cfg.size_for_rank(rank, index), rng)[:, :rank]
        dec = Decomposition.from_rows(_minimize_rows(basis, V, P, scale, cfg))
        return average_measure(dec, P, scale), dec

    sizes = sorted({cfg.size_for_rank(rank, i) for i in range(cfg.restarts)})
    logger.info(f"Convex roof: d={rho.dim}, rank={rank}, sizes={sizes}, restarts={cfg.restarts}, seed={cfg.seed}")
    outcomes = run_ordered(run, list(range(cfg.restarts)), cfg.threads)
    values = tuple(value for value, _ in outcomes)
    best = min(range(len(outcomes)), key=lambda i: (values[i], i))
    logger.info(f"Convex roof best value {values[best]:.12f} at restart {best}")
    return RoofResult(values[best], outcomes[best][1], best, values)


def audit(result: RoofResult, rho: DensityMatrix, P: HomogeneousPolynomial, scale: float = 1.0) -> Tuple[float, float]:
    """
    Kiểm tra lại kết quả mà không tin bộ giải.

    Returns:
        (reconstruction error max-norm, |value - average_measure(witness)|)
    """
    recon = result.decomposition.reconstruction_error(rho)
    value_error = abs(result.value - average_measure(result.decomposition, P, scale))
    return recon, value_error
