"""
Polynomial Measure - Độ đo coherence dạng đa thức thuần nhất

C_p(|ψ>) = scale * |P_h(a_1, ..., a_d)|^m

- G-coherence: P = a_1 a_2 ... a_d, m = 2/d, scale = d
- l1 (chỉ d = 2): P = a_1 a_2, m = 1, scale = 2
- Đa thức chồng chập q(ω) = P_h(ψ_1 + ω ψ_2) và zero-coherence witness
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import mpmath as mp
import numpy as np

from src.core.errors import (
    ConstantPolynomial,
    DimensionMismatch,
    DimensionTooSmall,
    InvalidPolynomial,
    NoConvergence,
    PreconditionError,
    RootFindingDiverged,
    StatesParallel,
)
from src.core.quantum_state import PureState
from src.core.root_finder import MAX_ITERATIONS, UnivariatePoly, roots
from src.core.sampling import random_proper_support, support_state
from src.utils.workers import derive_rng

logger = logging.getLogger("CoherenceKit.PolyMeasure")

# Tham số cấu hình cố định ở đầu file
WITNESS_TOLERANCE = 1e-8
VANISHING_TOLERANCE = 1e-8
PARALLEL_TOLERANCE = 1e-9
SAMPLE_OFFSET = np.sqrt(2.0) - 1.0  # phần lệch góc (vô tỉ) của các điểm lấy mẫu
POLISH_DPS = 60
POLISH_ITERATIONS = 80

TermsInput = Union[Mapping[Tuple[int, ...], complex], Iterable[Tuple[Iterable[int], complex]]]


@dataclass(frozen=True, eq=False)
class HomogeneousPolynomial:
    """
    Đa thức thuần nhất bậc h theo các biên độ, kèm số mũ m.

    terms được lưu dưới dạng tuple đã sắp xếp theo multi-index
    (thứ tự chuẩn để serialize ổn định).
    """
    dim: int
    degree: int
    power: float
    terms: Any

    def __post_init__(self):
        if self.dim < 2:
            raise DimensionTooSmall(f"Polynomial dimension must be >= 2, got {self.dim}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise InvalidPolynomial(f"Degree must be a positive integer, got {self.degree}")
        if not self.power > 0:
            raise InvalidPolynomial(f"Power m must be > 0, got {self.power}")

        items = self.terms.items() if isinstance(self.terms, Mapping) else self.terms
        merged: Dict[Tuple[int, ...], complex] = {}
        for exponents, coeff in items:
            key = tuple(int(k) for k in exponents)
            if len(key) != self.dim:
                raise InvalidPolynomial(f"Multi-index {key} has length {len(key)}, expected {self.dim}")
            if any(k < 0 for k in key):
                raise InvalidPolynomial(f"Multi-index {key} has negative exponents")
            if sum(key) != self.degree:
                raise InvalidPolynomial(f"Multi-index {key} sums to {sum(key)}, expected degree {self.degree}")
            merged[key] = merged.get(key, 0j) + complex(coeff)

        canonical = tuple((key, merged[key]) for key in sorted(merged) if merged[key] != 0)
        if not canonical:
            raise InvalidPolynomial("Polynomial has no nonzero coefficient")

        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "power", float(self.power))
        object.__setattr__(self, "terms", canonical)
        exponents = np.array([key for key, _ in canonical], dtype=int)
        coeffs = np.array([c for _, c in canonical], dtype=complex)
        exponents.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "_exponents", exponents)
        object.__setattr__(self, "_coeffs", coeffs)

    def value(self, vectors) -> Union[complex, np.ndarray]:
        """
        P_h(v) cho vector (chưa chuẩn hoá) v, hoặc một batch shape (..., d).
        """
        v = self._as_vectors(vectors)
        result = _monomials(v, self._exponents) @ self._coeffs
        return complex(result) if np.ndim(result) == 0 else result

    def gradient(self, vectors) -> np.ndarray:
        """
        Đạo hàm riêng ∂P_h/∂a_j (P_h chỉnh hình), shape giống đầu vào.
        """
        v = self._as_vectors(vectors)
        out = np.zeros(v.shape, dtype=complex)
        for j in range(self.dim):
            k = self._exponents[:, j]
            mask = k > 0
            if not mask.any():
                continue
            lowered = self._exponents[mask].copy()
            lowered[:, j] -= 1
            out[..., j] = _monomials(v, lowered) @ (self._coeffs[mask] * k[mask])
        return out

    def _as_vectors(self, vectors) -> np.ndarray:
        v = np.asarray(vectors, dtype=complex)
        if v.shape[-1] != self.dim:
            raise DimensionMismatch(f"Vector dimension {v.shape[-1]} does not match polynomial dimension {self.dim}")
        return v

    def to_dict(self) -> Dict[str, Any]:
        """Dạng JSON: {"dim", "degree", "power", "terms": [{"exponents", "coeff": [re, im]}]}"""
        return {
            "dim": self.dim,
            "degree": self.degree,
            "power": self.power,
            "terms": [
                {"exponents": list(key), "coeff": [coeff.real, coeff.imag]}
                for key, coeff in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "HomogeneousPolynomial":
        terms = [(t["exponents"], complex(t["coeff"][0], t["coeff"][1])) for t in data["terms"]]
        return cls(dim=int(data["dim"]), degree=int(data["degree"]), power=float(data["power"]), terms=terms)

    def __str__(self):
        return f"HomogeneousPolynomial(d={self.dim}, h={self.degree}, m={self.power:g}, terms={len(self.terms)})"


@dataclass(frozen=True)
class CoherenceMeasure:
    """
    Cặp (P, scale) kèm nhãn hiển thị.
    """
    polynomial: HomogeneousPolynomial
    scale: float = 1.0
    label: str = "C_p"

    def __call__(self, psi: PureState) -> float:
        return evaluate(self.polynomial, psi, self.scale)


@dataclass(frozen=True)
class ZeroWitness:
    """
    Trạng thái (ψ_1 + ω ψ_2)/Z(ω) có độ đo bằng 0.
    omega = None nghĩa là chính ψ_2 (nghiệm tại vô cực).
    """
    omega: Optional[complex]
    state: PureState
    value: float


@dataclass(frozen=True)
class VanishingReport:
    dim: int
    trials: int
    max_value: float
    worst_state: Optional[PureState]
    violated: bool


# ===== CONSTRUCTORS =====

def g_polynomial(d: int) -> HomogeneousPolynomial:
    """
    P(a) = a_1 a_2 ... a_d, h = d, m = 2/d.
    """
    if d < 2:
        raise DimensionTooSmall(f"G-coherence needs d >= 2, got d={d}")
    return HomogeneousPolynomial(dim=d, degree=d, power=2.0 / d, terms={(1,) * d: 1.0})


def l1_polynomial() -> HomogeneousPolynomial:
    """P(a) = a_1 a_2 trên qubit, m = 1 (dùng với scale = 2)."""
    return HomogeneousPolynomial(dim=2, degree=2, power=1.0, terms={(1, 1): 1.0})


def g_measure(d: int) -> CoherenceMeasure:
    return CoherenceMeasure(g_polynomial(d), float(d), "C_G")


# ===== EVALUATION =====

def evaluate(P: HomogeneousPolynomial, psi: PureState, scale: float = 1.0) -> float:
    """
    scale * |P_h(ψ)|^m

    Raises:
        DimensionMismatch
    """
    if P.dim != psi.dim:
        raise DimensionMismatch(f"Polynomial dimension {P.dim} does not match state dimension {psi.dim}")
    if not scale > 0:
        raise PreconditionError(f"scale must be > 0, got {scale}")
    return float(scale * abs(P.value(psi.amplitudes)) ** P.power)


def weighted_measure(P: HomogeneousPolynomial, rows: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """
    p_i * C_p(ψ_i) cho các hàng w_i = sqrt(p_i) ψ_i (shape (..., d)).

    Dùng tính thuần nhất: p C(w/|w|) = scale |P(w)|^m |w|^(2 - h m).
    """
    rows = np.asarray(rows, dtype=complex)
    norms_sq = np.sum(np.abs(rows) ** 2, axis=-1)
    magnitude = np.abs(P.value(rows)) ** P.power
    exponent = 1.0 - 0.5 * P.degree * P.power
    out = np.zeros_like(norms_sq)
    nonzero = norms_sq > 0
    out[nonzero] = scale * magnitude[nonzero] * norms_sq[nonzero] ** exponent
    return out


def c_l1_pure(psi: PureState) -> float:
    """
    C_l1(|ψ>) = 2|a_1 a_2| (chỉ cho d = 2).
    """
    if psi.dim != 2:
        raise DimensionMismatch("l1 polynomial form defined for d=2 only")
    a = psi.amplitudes
    return float(2.0 * abs(a[0] * a[1]))


# ===== SUPERPOSITION POLYNOMIAL =====

def superposition_poly(P: HomogeneousPolynomial, psi1: PureState, psi2: PureState) -> UnivariatePoly:
    """
    Hệ số của q(ω) = P_h(ψ_1 + ω ψ_2).

    Lấy mẫu P_h tại h+1 điểm trên đường tròn đơn vị (góc căn bậc h+1
    của đơn vị, lệch một góc vô tỉ) rồi nội suy bằng FFT.
    """
    _check_dims(P, psi1, psi2)
    n = P.degree + 1
    offset = 2.0 * np.pi * SAMPLE_OFFSET / n
    k = np.arange(n)
    omegas = np.exp(1j * (2.0 * np.pi * k / n + offset))
    samples = P.value(psi1.amplitudes[None, :] + omegas[:, None] * psi2.amplitudes[None, :])
    coeffs = np.fft.fft(samples) / n * np.exp(-1j * k * offset)
    return UnivariatePoly(coeffs)


def zero_coherence_witness(
    P: HomogeneousPolynomial,
    psi1: PureState,
    psi2: PureState,
    scale: float = 1.0,
    max_iterations: int = MAX_ITERATIONS,
) -> List[ZeroWitness]:
    """
    Các trạng thái có C_p = 0 trong mặt phẳng chồng chập của ψ_1 và ψ_2.

    Nghiệm z_i của q(ω) được tinh chỉnh bằng Newton ở độ chính xác cao
    (mpmath). Giá trị C_p của witness được tính ở cùng độ chính xác đó;
    chỉ trạng thái trả về được làm tròn về complex128.

    Raises:
        StatesParallel: |<ψ_1|ψ_2>| >= 1 - 1e-9
        RootFindingDiverged: không tìm được nghiệm hợp lệ
    """
    _check_dims(P, psi1, psi2)
    if not scale > 0:
        raise PreconditionError(f"scale must be > 0, got {scale}")
    overlap = abs(psi1.inner(psi2))
    if overlap >= 1.0 - PARALLEL_TOLERANCE:
        raise StatesParallel(f"States are parallel (|overlap| = {overlap:.12f})")

    q = superposition_poly(P, psi1, psi2)
    try:
        candidates = roots(q, max_iterations)
    except ConstantPolynomial:
        candidates = []
    except NoConvergence as e:
        raise RootFindingDiverged(str(e)) from e

    if not candidates:
        value = evaluate(P, psi2, scale)
        if value > WITNESS_TOLERANCE:
            raise RootFindingDiverged("Superposition polynomial is constant but C_p(psi2) > 0")
        logger.debug("q(w) constant; returning psi2 as witness")
        return [ZeroWitness(omega=None, state=psi2, value=value)]

    witnesses: List[ZeroWitness] = []
    for z0 in candidates:
        omega, amplitudes, magnitude = _polish_witness(P, psi1.amplitudes, psi2.amplitudes, z0)
        if any(abs(omega - w.omega) <= 1e-8 * max(1.0, abs(omega)) for w in witnesses):
            continue
        value = float(scale * magnitude ** P.power)
        if value > WITNESS_TOLERANCE:
            raise RootFindingDiverged(f"Witness at omega={omega:.6g} has C_p={value:.3e} > {WITNESS_TOLERANCE}")
        witnesses.append(ZeroWitness(omega=omega, state=PureState(amplitudes), value=value))

    logger.debug("Found %d zero-coherence witness(es)", len(witnesses))
    return witnesses


def _monomials(v: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """Các đơn thức ∏_i v_i^{k_i}, shape (..., số term)."""
    monomials = np.ones(v.shape[:-1] + (exponents.shape[0],), dtype=complex)
    for i in range(v.shape[-1]):
        col = exponents[:, i]
        if not col.any():
            continue
        monomials = monomials * np.where(col == 0, 1.0, v[..., i, None] ** np.maximum(col, 1))
    return monomials


def _check_dims(P: HomogeneousPolynomial, psi1: PureState, psi2: PureState):
    if not P.dim == psi1.dim == psi2.dim:
        raise DimensionMismatch(f"Dimensions differ: P={P.dim}, psi1={psi1.dim}, psi2={psi2.dim}")


def _polish_witness(P: HomogeneousPolynomial, a1: np.ndarray, a2: np.ndarray, z0: complex):
    """
    Newton trên q(ω) ở POLISH_DPS chữ số.

    Returns:
        (ω, biên độ complex128 đã chuẩn hoá, |P_h| của trạng thái chuẩn hoá tính bằng mpmath)
    """
    with mp.workdps(POLISH_DPS):
        v1 = [mp.mpc(x.real, x.imag) for x in a1]
        v2 = [mp.mpc(x.real, x.imag) for x in a2]
        terms = [(key, mp.mpc(c.real, c.imag)) for key, c in P.terms]
        stop = mp.mpf(10) ** (-(POLISH_DPS - 5))
        z = mp.mpc(z0.real, z0.imag)
        for _ in range(POLISH_ITERATIONS):
            v = [x + z * y for x, y in zip(v1, v2)]
            value, slope = _mp_value_and_slope(terms, v, v2)
            if value == 0 or slope == 0:
                break
            step = value / slope
            z -= step
            if abs(step) <= stop * max(1, abs(z)):
                break
        v = [x + z * y for x, y in zip(v1, v2)]
        norm = mp.sqrt(mp.fsum(abs(x) ** 2 for x in v))
        unit = [x / norm for x in v]
        magnitude, _ = _mp_value_and_slope(terms, unit, [0] * len(unit))
        amplitudes = np.array([complex(x) for x in unit])
        return complex(z), amplitudes, float(abs(magnitude))


def _mp_value_and_slope(terms, v, direction):
    """P(v) và đạo hàm theo ω của P(ψ_1 + ω ψ_2)."""
    value = mp.mpc(0)
    slope = mp.mpc(0)
    for key, coeff in terms:
        factors = [v[i] ** k for i, k in enumerate(key)]
        value += coeff * mp.fprod(factors)
        for i, k in enumerate(key):
            if k == 0 or direction[i] == 0:
                continue
            others = mp.fprod(factors[j] for j in range(len(key)) if j != i)
            slope += coeff * others * k * v[i] ** (k - 1) * direction[i]
    return value, slope


# ===== NECESSARY-CONDITION CHECK =====

def check_rank_deficient_vanishing(
    P: HomogeneousPolynomial,
    scale: float,
    trials: int,
    rng_seed: int,
) -> VanishingReport:
    """
    Lấy mẫu trạng thái Haar trên các tập con thực sự của basis;
    một độ đo coherence đa thức hợp lệ phải bằng 0 trên tất cả.

    Raises:
        PreconditionError nếu trials < 1
    """
    if trials < 1:
        raise PreconditionError(f"trials must be >= 1, got {trials}")

    max_value = 0.0
    worst: Optional[PureState] = None
    for index in range(trials):
        rng = derive_rng(rng_seed, index)
        psi = support_state(P.dim, random_proper_support(P.dim, rng), rng)
        value = evaluate(P, psi, scale)
        if worst is None or value > max_value:
            max_value, worst = value, psi

    violated = max_value > VANISHING_TOLERANCE
    if violated:
        logger.info(f"Rank-deficient state with C_p={max_value:.3e}: measure fails the vanishing condition")
    return VanishingReport(dim=P.dim, trials=trials, max_value=max_value, worst_state=worst, violated=violated)
