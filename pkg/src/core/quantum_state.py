"""
Quantum State Core - Nền tảng vector/ma trận phức

Strategy:
- PureState / DensityMatrix luôn được kiểm tra khi tạo (không tự chuẩn hoá)
- Jacobi eigensolver cho ma trận Hermitian (cyclic sweeps, deterministic)
- Dephasing, permutation unitary, áp dụng kênh Kraus
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from src.core.errors import (
    DimensionMismatch,
    DimensionTooSmall,
    InvalidState,
    KrausNotTracePreserving,
    NoConvergence,
    NotAPermutation,
    NotNormalized,
    ZeroVector,
)

logger = logging.getLogger("CoherenceKit.QuantumState")

# Tham số dung sai cố định ở đầu file
NORM_TOLERANCE = 1e-10
TRACE_TOLERANCE = 1e-10
HERMITIAN_TOLERANCE = 1e-12
PSD_TOLERANCE = 1e-9
KRAUS_TOLERANCE = 1e-8
JACOBI_MAX_SWEEPS = 100
JACOBI_TOLERANCE = 1e-13


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PureState:
    """
    Trạng thái thuần đã chuẩn hoá trong basis tham chiếu.
    (Normalized amplitude vector, validated on construction)
    """
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size == 0:
            raise ZeroVector("Empty amplitude vector")
        if amps.size < 2:
            raise DimensionTooSmall(f"Pure state needs d >= 2, got d={amps.size}")
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if norm_sq == 0.0:
            raise ZeroVector("All amplitudes are zero")
        if abs(norm_sq - 1.0) > NORM_TOLERANCE:
            raise NotNormalized(f"Squared norm {norm_sq:.15g} deviates from 1 beyond {NORM_TOLERANCE}")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        """Vector |a_i|^2."""
        return np.abs(self.amplitudes) ** 2

    def inner(self, other: "PureState") -> complex:
        """<self|other>"""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __str__(self):
        body = ", ".join(f"{a.real:+.6f}{a.imag:+.6f}j" for a in self.amplitudes)
        return f"PureState(d={self.dim}: [{body}])"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Ma trận mật độ: Hermitian, PSD, trace = 1.
    Các phần tử lưu trữ luôn Hermitian chính xác (entry(i,j) == conj(entry(j,i))).
    """
    entries: np.ndarray

    def __post_init__(self):
        mat = np.array(self.entries, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidState(f"Density matrix must be square, got shape {mat.shape}")
        if mat.shape[0] < 2:
            raise DimensionTooSmall(f"Density matrix needs d >= 2, got d={mat.shape[0]}")
        asym = float(np.max(np.abs(mat - mat.conj().T)))
        if asym > HERMITIAN_TOLERANCE:
            raise InvalidState(f"Matrix is not Hermitian (max deviation {asym:.3e})")
        mat = 0.5 * (mat + mat.conj().T)
        trace = float(np.trace(mat).real)
        if abs(trace - 1.0) > TRACE_TOLERANCE:
            raise InvalidState(f"Trace {trace:.15g} deviates from 1 beyond {TRACE_TOLERANCE}")
        eigenvalues, _ = jacobi_eigh(mat)
        if eigenvalues[-1] < -PSD_TOLERANCE:
            raise InvalidState(f"Matrix is not positive semidefinite (min eigenvalue {eigenvalues[-1]:.3e})")
        object.__setattr__(self, "entries", _frozen(mat))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __str__(self):
        return f"DensityMatrix(d={self.dim}, purity={float(np.real(np.trace(self.entries @ self.entries))):.6f})"


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Phổ của ma trận Hermitian: trị riêng giảm dần, vector riêng theo cột.
    """
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Σ λ_k v_k v_k†"""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def rank(self, threshold: float = 1e-12) -> int:
        return int(np.count_nonzero(self.eigenvalues > threshold))


# ===== CONSTRUCTION =====

def validate_state(raw: Sequence[complex]) -> PureState:
    """
    Kiểm tra vector biên độ. Không tự chuẩn hoá.

    Raises:
        NotNormalized, ZeroVector
    """
    return PureState(np.asarray(raw, dtype=complex))


def normalize(raw: Sequence[complex]) -> PureState:
    """
    Chuẩn hoá tường minh (explicit helper cho CLI).
    """
    vec = np.asarray(raw, dtype=complex).reshape(-1)
    norm = float(np.linalg.norm(vec))
    if vec.size == 0 or norm == 0.0:
        raise ZeroVector("Cannot normalize a zero vector")
    return PureState(vec / norm)


def validate_density(raw) -> DensityMatrix:
    return DensityMatrix(np.asarray(raw, dtype=complex))


def pure_density(psi: PureState) -> DensityMatrix:
    """|ψ><ψ|"""
    a = psi.amplitudes
    return DensityMatrix(np.outer(a, a.conj()))


def basis_state(d: int, index: int) -> PureState:
    amps = np.zeros(d, dtype=complex)
    amps[index] = 1.0
    return PureState(amps)


# ===== EIGENSOLVER =====

def jacobi_eigh(matrix: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cyclic Jacobi cho ma trận Hermitian phức.

    Mỗi rotation trên cặp (p, q) gồm một pha làm a_pq thực rồi một
    rotation thực triệt tiêu nó. Thứ tự quét cố định nên kết quả
    deterministic.

    Args:
        matrix: Ma trận Hermitian (n x n)
        max_sweeps: Số sweep tối đa

    Returns:
        (eigenvalues giảm dần, eigenvectors theo cột)

    Raises:
        NoConvergence nếu vượt quá max_sweeps
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    threshold = JACOBI_TOLERANCE * max(1, n) * float(np.linalg.norm(a))

    sweeps = 0
    while _off_norm(a) > threshold:
        if sweeps >= max_sweeps:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {_off_norm(a):.3e})")
        for p in range(n - 1):
            for q in range(p + 1, n):
                r = abs(a[p, q])
                if r == 0.0:
                    continue
                phase = cmath.exp(-1j * cmath.phase(a[p, q]))
                theta = 0.5 * math.atan2(2.0 * r, a[q, q].real - a[p, p].real)
                c, s = math.cos(theta), math.sin(theta)
                rot = np.array([[c, s], [-s * phase, c * phase]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ rot
        sweeps += 1

    logger.debug("Jacobi converged: n=%d, sweeps=%d", n, sweeps)

    eigenvalues = np.real(np.diag(a)).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    v = v[:, order]

    # Quy ước pha: phần tử có modulus lớn nhất của mỗi vector là số thực dương
    for k in range(n):
        j = int(np.argmax(np.abs(v[:, k])))
        pivot = v[j, k]
        v[:, k] *= np.conj(pivot) / abs(pivot)
        v[j, k] = abs(pivot)

    return eigenvalues, v


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def eig_hermitian(rho: DensityMatrix, max_sweeps: int = JACOBI_MAX_SWEEPS) -> Spectrum:
    """
    Phân tích phổ của ma trận mật độ.
    """
    eigenvalues, eigenvectors = jacobi_eigh(rho.entries, max_sweeps=max_sweeps)
    return Spectrum(_frozen(eigenvalues), _frozen(eigenvectors))


# ===== CHANNELS =====

def dephase(rho: DensityMatrix) -> DensityMatrix:
    """Δ(ρ): giữ lại đường chéo."""
    return DensityMatrix(np.diag(np.diag(rho.entries)))


def dephased_rank(psi: PureState, zero_tol: float = 1e-10) -> int:
    """
    Rank của Δ(|ψ><ψ|) = số biên độ có |a_i|^2 > zero_tol.
    """
    return int(np.count_nonzero(psi.probabilities > zero_tol))


def fidelity_with(rho: DensityMatrix, psi: PureState) -> float:
    """<ψ|ρ|ψ>"""
    a = psi.amplitudes
    return float(np.real(np.vdot(a, rho.entries @ a)))


def permutation_unitary(perm: Sequence[int]) -> np.ndarray:
    """
    U_g = Σ_k |g(k)><k| với perm[k] = g(k) (0-based).

    Raises:
        NotAPermutation
    """
    perm = [int(i) for i in perm]
    d = len(perm)
    if sorted(perm) != list(range(d)):
        raise NotAPermutation(f"{perm} is not a permutation of 0..{d - 1}")
    u = np.zeros((d, d))
    u[perm, list(range(d))] = 1.0
    return u


def basis_dephasing_kraus(d: int) -> List[np.ndarray]:
    """Kraus {|i><i|} của kênh dephasing hoàn toàn."""
    ops = []
    for i in range(d):
        k = np.zeros((d, d), dtype=complex)
        k[i, i] = 1.0
        ops.append(k)
    return ops


def subspace_dephasing_kraus(d: int, d1: int) -> List[np.ndarray]:
    """
    Kraus {P_1, P_2}: projector lên span{|0>..|d1-1>} và phần bù.
    (Dephasing between the two subspaces)
    """
    if not 0 < d1 < d:
        raise DimensionMismatch(f"Subspace size d1={d1} must satisfy 0 < d1 < d={d}")
    p1 = np.diag([1.0] * d1 + [0.0] * (d - d1)).astype(complex)
    return [p1, np.eye(d, dtype=complex) - p1]


def check_trace_preserving(kraus_list: Sequence[np.ndarray], d: int) -> List[np.ndarray]:
    """
    Kiểm tra Σ K†K = I và kích thước các Kraus operator.

    Returns:
        Danh sách Kraus dạng numpy complex
    """
    ops = [np.asarray(k, dtype=complex) for k in kraus_list]
    if not ops:
        raise KrausNotTracePreserving("Empty Kraus list")
    for k in ops:
        if k.shape != (d, d):
            raise DimensionMismatch(f"Kraus operator shape {k.shape} does not match d={d}")
    total = sum(k.conj().T @ k for k in ops)
    deviation = float(np.max(np.abs(total - np.eye(d))))
    if deviation > KRAUS_TOLERANCE:
        raise KrausNotTracePreserving(f"Σ K†K deviates from identity by {deviation:.3e}")
    return ops


def apply_channel(kraus_list: Sequence[np.ndarray], rho: DensityMatrix) -> DensityMatrix:
    """
    Φ(ρ) = Σ_n K_n ρ K_n†

    Raises:
        KrausNotTracePreserving, DimensionMismatch
    """
    ops = check_trace_preserving(kraus_list, rho.dim)
    out = sum(k @ rho.entries @ k.conj().T for k in ops)
    return DensityMatrix(0.5 * (out + out.conj().T))


def conjugate(rho: DensityMatrix, unitary: np.ndarray) -> DensityMatrix:
    """U ρ U†"""
    out = unitary @ rho.entries @ unitary.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T))
