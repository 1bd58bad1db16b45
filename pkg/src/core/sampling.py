"""
Sampling - Sinh ngẫu nhiên trạng thái và unitary theo độ đo Haar

Mọi hàm nhận numpy Generator để kết quả tái lập được từ seed.
"""

from typing import Sequence

import numpy as np

from src.core.quantum_state import DensityMatrix, PureState


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Unitary n x n ngẫu nhiên theo Haar.

    Lấy mẫu Ginibre rồi QR; nhân cột với pha của đường chéo R để
    loại bỏ tính đa trị của Q.
    """
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def haar_state(d: int, rng: np.random.Generator) -> PureState:
    """Trạng thái thuần ngẫu nhiên (complex Gaussian chuẩn hoá)."""
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(v / np.linalg.norm(v))


def support_state(d: int, support: Sequence[int], rng: np.random.Generator) -> PureState:
    """
    Trạng thái Haar chỉ có biên độ trên các basis trong `support`.
    """
    support = list(support)
    v = np.zeros(d, dtype=complex)
    v[support] = rng.standard_normal(len(support)) + 1j * rng.standard_normal(len(support))
    return PureState(v / np.linalg.norm(v))


def random_proper_support(d: int, rng: np.random.Generator) -> np.ndarray:
    """Tập con thực sự (1..d-1 phần tử) của basis, chọn đều."""
    size = int(rng.integers(1, d))
    return np.sort(rng.choice(d, size=size, replace=False))


def random_density(d: int, rank: int, rng: np.random.Generator) -> DensityMatrix:
    """
    Ma trận mật độ rank cho trước: partial trace của purification Haar.
    """
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def random_orthogonal_pair(d: int, rng: np.random.Generator):
    """Hai trạng thái Haar trực giao (Gram-Schmidt)."""
    psi1 = haar_state(d, rng)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    v = v - np.vdot(psi1.amplitudes, v) * psi1.amplitudes
    return psi1, PureState(v / np.linalg.norm(v))


def random_overlapping_pair(d: int, max_overlap: float, rng: np.random.Generator):
    """
    Hai trạng thái với |<ψ1|ψ2>| <= max_overlap.
    """
    psi1, perp = random_orthogonal_pair(d, rng)
    overlap = float(rng.uniform(0.0, max_overlap))
    phase = np.exp(2j * np.pi * rng.uniform())
    v = overlap * phase * psi1.amplitudes + np.sqrt(1.0 - overlap ** 2) * perp.amplitudes
    return psi1, PureState(v / np.linalg.norm(v))
