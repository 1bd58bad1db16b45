"""
Majorization - Quan hệ trội (majorization) và điều kiện biến đổi incoherent

x ⪰ y  <=>  mọi tổng tiền tố (sắp giảm dần) của x >= của y
ψ -> φ bằng phép toán incoherent nếu |ψ|² ≺ |φ|² (điều kiện đủ)
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from src.core.errors import (
    DimensionMismatch,
    DimensionTooSmall,
    InvalidState,
    LengthMismatch,
    NotTransformable,
)
from src.core.poly_measure import HomogeneousPolynomial, evaluate
from src.core.quantum_state import PureState
from src.core.sampling import haar_state

logger = logging.getLogger("CoherenceKit.Majorization")

# Tham số cấu hình cố định ở đầu file
PREFIX_TOLERANCE = 1e-12
SUM_TOLERANCE = 1e-10
MONOTONICITY_TOLERANCE = 1e-9
SUPPORT_THRESHOLD = 1e-12


@dataclass(frozen=True, eq=False)
class ProbVector:
    """
    Vector xác suất: không âm, tổng bằng 1 (sai số 1e-10).
    """
    entries: np.ndarray

    def __post_init__(self):
        x = np.array(self.entries, dtype=float).reshape(-1)
        if x.size == 0:
            raise InvalidState("Probability vector is empty")
        if np.any(x < 0):
            raise InvalidState("Probability vector has negative entries")
        if abs(float(np.sum(x)) - 1.0) > SUM_TOLERANCE:
            raise InvalidState(f"Probability vector sums to {float(np.sum(x)):.15g}, expected 1")
        x.setflags(write=False)
        object.__setattr__(self, "entries", x)

    def __len__(self):
        return self.entries.size

    @classmethod
    def of_state(cls, psi: PureState) -> "ProbVector":
        return cls(psi.probabilities)

    def __str__(self):
        return "(" + ", ".join(f"{v:.6f}" for v in self.entries) + ")"


@dataclass(frozen=True)
class MonotonicityReport:
    """
    C_p(ψ) và C_p(φ) cho một cặp ψ -> φ; violated khi C_p giảm không đúng chiều.
    """
    source_value: float
    target_value: float
    violated: bool

    def __str__(self):
        flag = "VIOLATION" if self.violated else "ok"
        return f"C(psi)={self.source_value:.12f} C(phi)={self.target_value:.12f} [{flag}]"


VectorLike = Union[ProbVector, Sequence[float], np.ndarray]


def _as_prob(x: VectorLike) -> ProbVector:
    return x if isinstance(x, ProbVector) else ProbVector(np.asarray(x, dtype=float))


def majorizes(x: VectorLike, y: VectorLike) -> bool:
    """
    True khi x majorize y (y ≺ x).

    Raises:
        LengthMismatch: độ dài khác nhau (cần pad 0 trước khi gọi)
    """
    x, y = _as_prob(x), _as_prob(y)
    if len(x) != len(y):
        raise LengthMismatch(f"Vectors have different lengths ({len(x)} vs {len(y)})")
    prefix_x = np.cumsum(np.sort(x.entries)[::-1])
    prefix_y = np.cumsum(np.sort(y.entries)[::-1])
    return bool(np.all(prefix_x >= prefix_y - PREFIX_TOLERANCE))


def incoherently_transformable(psi: PureState, phi: PureState) -> bool:
    """
    Điều kiện majorization cho ψ -> φ (chỉ là điều kiện đủ).

    Raises:
        DimensionMismatch
    """
    if psi.dim != phi.dim:
        raise DimensionMismatch(f"States have different dimensions ({psi.dim} vs {phi.dim})")
    return majorizes(phi.probabilities, psi.probabilities)


def monotonicity_witness(
    P: HomogeneousPolynomial,
    scale: float,
    psi: PureState,
    phi: PureState,
) -> MonotonicityReport:
    """
    So sánh C_p(ψ) với C_p(φ) khi ψ -> φ được chứng nhận bởi majorization.

    Raises:
        NotTransformable: cặp không thoả điều kiện majorization
    """
    if not incoherently_transformable(psi, phi):
        raise NotTransformable("Source state is not certified transformable into target by majorization")
    source = evaluate(P, psi, scale)
    target = evaluate(P, phi, scale)
    return MonotonicityReport(source, target, source < target - MONOTONICITY_TOLERANCE)


# ===== SAMPLERS =====

def sample_transformable_pair(d: int, rng: np.random.Generator) -> Tuple[PureState, PureState]:
    """
    Cặp (ψ, φ) với |ψ|² ≺ |φ|²: φ Haar, |ψ|² là ảnh của |φ|² qua các T-transform ngẫu nhiên.
    """
    if d < 2:
        raise DimensionTooSmall(f"Need d >= 2, got d={d}")
    phi = haar_state(d, rng)
    probs = phi.probabilities.copy()
    for _ in range(int(rng.integers(1, d + 1))):
        j, k = rng.choice(d, size=2, replace=False)
        t = float(rng.uniform())
        pj, pk = probs[j], probs[k]
        probs[j] = t * pj + (1.0 - t) * pk
        probs[k] = (1.0 - t) * pj + t * pk
    phases = np.exp(2j * np.pi * rng.uniform(size=d))
    amplitudes = np.sqrt(probs) * phases
    return PureState(amplitudes / np.linalg.norm(amplitudes)), phi


def majorization_preserving_superposition(psi1: PureState, d2: int) -> PureState:
    """
    α ψ_1 ⊕ β Ψ_{d2} trên không gian d1 + d2, biến đổi được về ψ_1.

    α = (d2 · min|a_j|² + 1)^(-1/2), min lấy trên support của ψ_1.
    """
    if d2 < 1:
        raise DimensionTooSmall(f"Need d2 >= 1, got d2={d2}")
    probs = psi1.probabilities
    smallest = float(np.min(probs[probs > SUPPORT_THRESHOLD]))
    alpha = 1.0 / np.sqrt(d2 * smallest + 1.0)
    beta = np.sqrt(1.0 - alpha ** 2)
    amplitudes = np.concatenate([alpha * psi1.amplitudes, np.full(d2, beta / np.sqrt(d2), dtype=complex)])
    logger.debug(f"Superposition weights alpha={alpha:.12f}, beta={beta:.12f}")
    return PureState(amplitudes)
