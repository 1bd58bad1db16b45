"""
Symmetry Twirl - Trạng thái đối xứng hoán vị và G-coherence dạng đóng

- Λ(ρ) = (1/d!) Σ_g U_g ρ U_g†  (exact: liệt kê hoán vị; sampled: Monte-Carlo)
- ρ^s = p|Ψ_d><Ψ_d| + (1-p) I/d, overlap K = <Ψ_d|ρ|Ψ_d>
- C̄_G(K) (cực tiểu trên trạng thái thuần), C_G(K) = max{1 - d(1-K), 0}
- Cận dưới cho ρ bất kỳ, có thể tiền xử lý bằng kênh incoherent
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from src.core.errors import (
    ChannelNotIncoherent,
    DimensionTooLargeForExact,
    DimensionTooSmall,
    InvalidState,
    KOutOfRange,
    PreconditionError,
)
from src.core.quantum_state import DensityMatrix, PureState, apply_channel, check_trace_preserving
from src.utils.workers import derive_rng, run_ordered

logger = logging.getLogger("CoherenceKit.SymmetryTwirl")

# Tham số cấu hình cố định ở đầu file
EXACT_TWIRL_MAX_DIM = 8
TWIRL_CHUNK = 720
K_TOLERANCE = 1e-12
INCOHERENCE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SymmetricState:
    """
    Trạng thái đối xứng một tham số (mixing p hoặc overlap K).
    """
    dim: int
    mixing_p: float

    def __post_init__(self):
        if self.dim < 2:
            raise DimensionTooSmall(f"Symmetric state needs d >= 2, got d={self.dim}")
        if not -K_TOLERANCE <= self.mixing_p <= 1.0 + K_TOLERANCE:
            raise KOutOfRange(f"Mixing probability p={self.mixing_p} outside [0, 1]")
        object.__setattr__(self, "mixing_p", min(1.0, max(0.0, float(self.mixing_p))))

    @property
    def overlap(self) -> float:
        """K = p (d-1)/d + 1/d"""
        d = self.dim
        return self.mixing_p * (d - 1) / d + 1.0 / d

    @classmethod
    def from_overlap(cls, d: int, K: float) -> "SymmetricState":
        _check_symmetric_K(d, K)
        return cls(d, (K - 1.0 / d) * d / (d - 1))

    def density(self) -> DensityMatrix:
        d = self.dim
        p = self.mixing_p
        return DensityMatrix(p * np.full((d, d), 1.0 / d) + (1.0 - p) * np.eye(d) / d)

    def __str__(self):
        return f"SymmetricState(d={self.dim}, p={self.mixing_p:.6f}, K={self.overlap:.6f})"


@dataclass(frozen=True)
class CurveRow:
    K: float
    cbar_g: float
    cg: float


# ===== STATES =====

def max_coherent(d: int) -> PureState:
    """|Ψ_d> = Σ_i |i> / sqrt(d)"""
    if d < 2:
        raise DimensionTooSmall(f"Maximally coherent state needs d >= 2, got d={d}")
    return PureState(np.full(d, 1.0 / math.sqrt(d), dtype=complex))


def symmetric_state(d: int, p: float) -> SymmetricState:
    return SymmetricState(d, p)


def overlap_K(rho: DensityMatrix) -> float:
    """
    K = <Ψ_d|ρ|Ψ_d> = (tổng mọi phần tử) / d.
    """
    value = complex(np.sum(rho.entries)) / rho.dim
    if abs(value.imag) > 1e-12:
        raise InvalidState(f"Overlap has imaginary part {value.imag:.3e}")
    return float(value.real)


# ===== TWIRLING =====

def iter_permutations(d: int) -> Iterator[Tuple[int, ...]]:
    """
    Hoán vị của 0..d-1 theo thứ tự từ điển (successor lặp, không đệ quy).
    """
    perm = list(range(d))
    while True:
        yield tuple(perm)
        i = d - 2
        while i >= 0 and perm[i] >= perm[i + 1]:
            i -= 1
        if i < 0:
            return
        j = d - 1
        while perm[j] <= perm[i]:
            j -= 1
        perm[i], perm[j] = perm[j], perm[i]
        perm[i + 1:] = reversed(perm[i + 1:])


def twirl(
    rho: DensityMatrix,
    samples: Optional[int] = None,
    seed: int = 0,
    threads: Optional[int] = None,
) -> DensityMatrix:
    """
    Λ(ρ).

    Args:
        rho: Trạng thái đầu vào
        samples: None -> exact (d <= 8); n -> trung bình n hoán vị ngẫu nhiên
            (sai số Monte-Carlo O(1/sqrt(n)))
        seed: Seed cho chế độ sampled
        threads: Số worker tối đa cho exact mode

    Raises:
        DimensionTooLargeForExact
    """
    d = rho.dim
    if samples is None:
        if d > EXACT_TWIRL_MAX_DIM:
            raise DimensionTooLargeForExact(f"Exact twirl supports d <= {EXACT_TWIRL_MAX_DIM}, got d={d}; use sampled mode")
        perms = np.array(list(iter_permutations(d)), dtype=int)
    else:
        if samples < 1:
            raise PreconditionError(f"samples must be >= 1, got {samples}")
        rng = derive_rng(seed, 0)
        perms = np.array([rng.permutation(d) for _ in range(samples)], dtype=int)

    chunks = [perms[i:i + TWIRL_CHUNK] for i in range(0, len(perms), TWIRL_CHUNK)]
    partial = run_ordered(lambda chunk: _conjugation_sum(rho.entries, chunk), chunks, threads)
    total = _pairwise_sum(partial) / len(perms)
    logger.debug("Twirl over %d permutations (d=%d, exact=%s)", len(perms), d, samples is None)
    return DensityMatrix(0.5 * (total + total.conj().T))


def _conjugation_sum(entries: np.ndarray, perms: np.ndarray) -> np.ndarray:
    # (U_g ρ U_g†)[a, b] = ρ[g^-1(a), g^-1(b)]
    inverse = np.argsort(perms, axis=1)
    stacked = entries[inverse[:, :, None], inverse[:, None, :]]
    total = np.zeros_like(entries)
    for block in stacked:
        total += block
    return total


def _pairwise_sum(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Cộng theo cặp, thứ tự cố định."""
    blocks = list(blocks)
    while len(blocks) > 1:
        paired = [blocks[i] + blocks[i + 1] for i in range(0, len(blocks) - 1, 2)]
        if len(blocks) % 2:
            paired.append(blocks[-1])
        blocks = paired
    return blocks[0]


def twirl_closed_form(rho: DensityMatrix) -> DensityMatrix:
    """
    Chiếu lên dạng hai tham số: trung bình đường chéo và trung bình ngoài đường chéo.
    """
    d = rho.dim
    diag_mean = float(np.real(np.trace(rho.entries))) / d
    off_mean = float(np.real(np.sum(rho.entries) - np.trace(rho.entries))) / (d * (d - 1))
    out = np.full((d, d), off_mean, dtype=complex)
    np.fill_diagonal(out, diag_mean)
    return DensityMatrix(out)


# ===== CLOSED FORMS =====

def _check_symmetric_K(d: int, K: float):
    if d < 2:
        raise DimensionTooSmall(f"d must be >= 2, got d={d}")
    if not 1.0 / d - K_TOLERANCE <= K <= 1.0 + K_TOLERANCE:
        raise KOutOfRange(f"K={K} outside [1/d, 1] for d={d}")


def cbar_g(d: int, K: float) -> float:
    """
    Cực tiểu C_G trên trạng thái thuần có overlap K.

    0 khi K <= (d-1)/d, ngược lại d (a b^(d-1))^(2/d).
    """
    if d < 2:
        raise DimensionTooSmall(f"d must be >= 2, got d={d}")
    if not -K_TOLERANCE <= K <= 1.0 + K_TOLERANCE:
        raise KOutOfRange(f"K={K} outside [0, 1]")
    K = min(1.0, max(0.0, K))
    if K <= (d - 1) / d:
        return 0.0
    root_k = math.sqrt(K)
    root_rest = math.sqrt(1.0 - K)
    a = (root_k - math.sqrt(d - 1) * root_rest) / math.sqrt(d)
    b = (root_k + root_rest / math.sqrt(d - 1)) / math.sqrt(d)
    return d * (a * b ** (d - 1)) ** (2.0 / d)


def cbar_g_numeric(d: int, K: float, starts: int = 8, seed: int = 0) -> float:
    """
    Kiểm tra số của C̄_G: cực tiểu d (Π x_i)^(2/d) với Σx_i = sqrt(dK), Σx_i^2 = 1.

    Dùng SLSQP với nhiều điểm khởi tạo; nhánh K <= (d-1)/d luôn có
    nghiệm khả thi với một biên độ bằng 0 nên trả về 0.
    """
    if d < 2:
        raise DimensionTooSmall(f"d must be >= 2, got d={d}")
    if not -K_TOLERANCE <= K <= 1.0 + K_TOLERANCE:
        raise KOutOfRange(f"K={K} outside [0, 1]")
    if K <= (d - 1) / d:
        return 0.0
    if K >= 1.0 - K_TOLERANCE:
        return 1.0

    target = math.sqrt(d * K)
    constraints = [
        {"type": "eq", "fun": lambda x: np.sum(x) - target, "jac": lambda x: np.ones_like(x)},
        {"type": "eq", "fun": lambda x: x @ x - 1.0, "jac": lambda x: 2.0 * x},
    ]
    objective = lambda x: (2.0 / d) * np.sum(np.log(x))
    gradient = lambda x: (2.0 / d) / x

    rng = np.random.default_rng(seed)
    first = np.ones(d)
    first[0] = 0.3
    guesses = [first / np.linalg.norm(first)]
    for _ in range(max(0, starts - 1)):
        x0 = rng.uniform(0.2, 1.0, d)
        guesses.append(x0 / np.linalg.norm(x0))

    best = math.inf
    for x0 in guesses:
        result = minimize(objective, x0, jac=gradient, method="SLSQP",
                          bounds=[(1e-12, 1.0)] * d, constraints=constraints,
                          options={"ftol": 1e-15, "maxiter": 500})
        x = result.x
        feasible = abs(np.sum(x) - target) < 1e-9 and abs(x @ x - 1.0) < 1e-9
        if feasible and result.fun < best:
            best = float(result.fun)
    if not math.isfinite(best):
        raise PreconditionError(f"Constrained minimisation found no feasible point for d={d}, K={K}")
    return d * math.exp(best)


def cg_symmetric(d: int, K: float) -> float:
    """C_G(ρ^s) = max{1 - d(1-K), 0}"""
    _check_symmetric_K(d, K)
    return max(1.0 - d * (1.0 - K), 0.0)


def cg_lower_bound(rho: DensityMatrix) -> float:
    """
    Cận dưới của C_G(ρ) chỉ phụ thuộc vào overlap K.
    (K < 1/d cho cận 0)
    """
    d = rho.dim
    return max(1.0 - d * (1.0 - overlap_K(rho)), 0.0)


def check_incoherent(kraus_list: Sequence[np.ndarray], d: int) -> List[np.ndarray]:
    """
    Mỗi K_n |i><i| K_n† phải là ma trận chéo.

    Raises:
        KrausNotTracePreserving, ChannelNotIncoherent
    """
    ops = check_trace_preserving(kraus_list, d)
    for n, k in enumerate(ops):
        for i in range(d):
            column = k[:, i]
            image = np.outer(column, column.conj())
            off = image - np.diag(np.diag(image))
            if np.max(np.abs(off)) > INCOHERENCE_TOLERANCE:
                raise ChannelNotIncoherent(f"Kraus operator {n} maps |{i}><{i}| to a coherent state")
    return ops


def cg_lower_bound_with_pretreatment(rho: DensityMatrix, kraus_list: Sequence[np.ndarray]) -> float:
    """
    max(cận dưới của ρ, cận dưới của χ(ρ)) với χ là kênh incoherent do người dùng cung cấp.
    """
    ops = check_incoherent(kraus_list, rho.dim)
    treated = apply_channel(ops, rho)
    return max(cg_lower_bound(rho), cg_lower_bound(treated))


def sweep_symmetric_curve(d: int, K_min: float, K_max: float, n_points: int) -> List[CurveRow]:
    """
    Bảng (K, C̄_G, C_G) trên lưới K đều.
    """
    _check_symmetric_K(d, K_min)
    _check_symmetric_K(d, K_max)
    if not K_min < K_max:
        raise KOutOfRange(f"K_min={K_min} must be < K_max={K_max}")
    if n_points < 2:
        raise PreconditionError(f"n_points must be >= 2, got {n_points}")
    grid = np.linspace(K_min, K_max, n_points)
    grid[-1] = K_max
    return [CurveRow(float(K), cbar_g(d, float(K)), cg_symmetric(d, float(K))) for K in grid]


def optimal_symmetric_decomposition(d: int, K: float) -> List[Tuple[float, PureState]]:
    """
    Phân tách tối ưu của ρ^s(K) cho C_G.

    K >= (d-1)/d: |Ψ_d> với trọng số 1 - d(1-K) cộng orbit hoán vị của
    trạng thái có một biên độ 0 và d-1 biên độ bằng nhau.
    K < (d-1)/d: trộn orbit đó với các basis state (I/d).
    """
    _check_symmetric_K(d, K)
    K = min(1.0, max(1.0 / d, K))
    kink = (d - 1) / d
    orbit = []
    for j in range(d):
        amps = np.full(d, 1.0 / math.sqrt(d - 1), dtype=complex)
        amps[j] = 0.0
        orbit.append(PureState(amps))

    entries: List[Tuple[float, PureState]] = []
    if K >= kink:
        weight = max(0.0, 1.0 - d * (1.0 - K))
        if weight > 0:
            entries.append((weight, max_coherent(d)))
        entries.extend(((1.0 - weight) / d, psi) for psi in orbit)
    else:
        t = (K - 1.0 / d) / (kink - 1.0 / d)
        entries.extend((t / d, psi) for psi in orbit)
        for i in range(d):
            amps = np.zeros(d, dtype=complex)
            amps[i] = 1.0
            entries.append(((1.0 - t) / d, PureState(amps)))
    return [(p, psi) for p, psi in entries if p > 0]
