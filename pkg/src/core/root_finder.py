"""
Root Finder - Tìm nghiệm đa thức một biến bằng Aberth-Ehrlich

Strategy:
- Cắt các hệ số bậc cao bằng 0 (bậc có thể giảm dưới h)
- Tách nghiệm tại 0 từ các hệ số bậc thấp bằng 0
- Aberth-Ehrlich đồng thời, khởi tạo trên đường tròn bán kính Cauchy
"""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np
from numpy.polynomial import polynomial as npoly

from src.core.errors import ConstantPolynomial, NoConvergence

logger = logging.getLogger("CoherenceKit.RootFinder")

# Tham số cấu hình cố định ở đầu file
MAX_ITERATIONS = 500
CORRECTION_TOLERANCE = 1e-13
RESIDUAL_TOLERANCE = 1e-9
TRIM_TOLERANCE = 1e-14
START_ANGLE = 0.4  # lệch góc để tránh đối xứng với trục thực


@dataclass(frozen=True, eq=False)
class UnivariatePoly:
    """
    q(ω) = Σ_j c_j ω^j, hệ số theo bậc tăng dần (c_0 ... c_h).
    """
    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=complex).reshape(-1)
        if coeffs.size == 0:
            raise ConstantPolynomial("Polynomial has no coefficients")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def nominal_degree(self) -> int:
        return self.coefficients.size - 1

    def __call__(self, omega):
        return npoly.polyval(omega, self.coefficients)

    def trimmed(self) -> np.ndarray:
        """
        Bỏ các hệ số bậc cao có độ lớn <= TRIM_TOLERANCE * max|c|.
        """
        coeffs = self.coefficients
        scale = float(np.max(np.abs(coeffs)))
        if scale == 0.0:
            return coeffs[:1]
        top = coeffs.size - 1
        while top > 0 and abs(coeffs[top]) <= TRIM_TOLERANCE * scale:
            top -= 1
        return coeffs[:top + 1]

    def __str__(self):
        terms = [f"({c.real:+.6g}{c.imag:+.6g}j)w^{j}" for j, c in enumerate(self.coefficients)]
        return " + ".join(terms)


def roots(q: UnivariatePoly, max_iterations: int = MAX_ITERATIONS) -> List[complex]:
    """
    Tất cả nghiệm của đa thức đã cắt.

    Args:
        q: Đa thức
        max_iterations: Số vòng Aberth tối đa

    Returns:
        Danh sách nghiệm (nghiệm tại 0 trước, còn lại sắp theo (real, imag))

    Raises:
        ConstantPolynomial: bậc 0 sau khi cắt
        NoConvergence: không hội tụ và residual vẫn lớn
    """
    coeffs = q.trimmed()
    scale = float(np.max(np.abs(q.coefficients)))
    if coeffs.size <= 1 or scale == 0.0:
        raise ConstantPolynomial("Polynomial is constant after trimming")

    # Nghiệm tại 0 (hệ số bậc thấp bằng 0)
    low = 0
    while abs(coeffs[low]) <= TRIM_TOLERANCE * scale:
        low += 1
    zero_roots = [0j] * low
    reduced = coeffs[low:]
    if reduced.size == 1:
        return zero_roots

    found = _aberth(reduced, scale, max_iterations)
    found.sort(key=lambda z: (z.real, z.imag))
    return zero_roots + found


def _aberth(coeffs: np.ndarray, scale: float, max_iterations: int) -> List[complex]:
    monic = coeffs / coeffs[-1]
    n = monic.size - 1
    derivative = npoly.polyder(monic)

    radius = 1.0 + float(np.max(np.abs(monic[:-1])))
    k = np.arange(n)
    z = radius * (1.0 - 0.01 * k / n) * np.exp(1j * (2.0 * np.pi * k / n + START_ANGLE))

    converged = False
    iteration = 0
    for iteration in range(1, max_iterations + 1):
        p = npoly.polyval(z, monic)
        dp = npoly.polyval(z, derivative)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dp != 0, p / dp, p)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            repulsion = np.sum(1.0 / diff, axis=1)
            correction = ratio / (1.0 - ratio * repulsion)
        correction = np.where(p == 0, 0.0, correction)
        correction = np.nan_to_num(correction, nan=0.0, posinf=0.0, neginf=0.0)
        z = z - correction
        if np.all(np.abs(correction) <= CORRECTION_TOLERANCE * np.maximum(1.0, np.abs(z))):
            converged = True
            break

    residual = np.abs(npoly.polyval(z, coeffs))
    bound = RESIDUAL_TOLERANCE * scale * np.maximum(1.0, np.abs(z)) ** n
    if not converged:
        if np.all(residual <= bound):
            logger.debug("Aberth hit iteration cap but residuals are within tolerance (n=%d)", n)
        else:
            raise NoConvergence(f"Aberth-Ehrlich did not converge in {max_iterations} iterations "
                                f"(max residual {float(np.max(residual)):.3e})")
    logger.debug("Aberth: degree=%d, iterations=%d", n, iteration)
    return [complex(x) for x in z]
