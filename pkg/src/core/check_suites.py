"""
Check Suites - Các bộ kiểm tra thực nghiệm chạy từ lệnh `check`

- nogo: zero-coherence witness trong mọi họ chồng chập + độ đo bằng 0 khi support thiếu
- monotone: không vi phạm tính đơn điệu trên các cặp được majorization chứng nhận
- theorem3: kẹp giá trị convex roof số giữa cận dưới và công thức dạng đóng
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.core.convex_roof import SolverConfig, audit, minimize_convex_roof
from src.core.errors import CoherenceKitError, PreconditionError
from src.core.majorization import monotonicity_witness, sample_transformable_pair
from src.core.poly_measure import (
    WITNESS_TOLERANCE,
    check_rank_deficient_vanishing,
    evaluate,
    g_polynomial,
    zero_coherence_witness,
)
from src.core.sampling import random_orthogonal_pair, random_overlapping_pair
from src.core.symmetry_twirl import SymmetricState, cg_lower_bound, cg_symmetric
from src.utils.workers import derive_rng, run_ordered

SUITES = ("nogo", "monotone", "theorem3")


@dataclass
class SuiteReport:
    """
    Kết quả một bộ kiểm tra: tên, pass/fail và các dòng số liệu.
    """
    name: str
    passed: bool
    lines: List[str] = field(default_factory=list)

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return "\n".join([f"suite {self.name}: {status}"] + [f"  {line}" for line in self.lines])


class CheckRunner:
    """
    Chạy các bộ kiểm tra cho G-measure ở chiều d.
    """

    # Tham số cấu hình cố định ở đầu file
    OVERLAP_LIMIT = 0.9
    GAP_LOW = -1e-9
    GAP_HIGH = 1e-3
    BOUND_SLACK = 1e-9
    RECONSTRUCTION_LIMIT = 1e-8
    VALUE_LIMIT = 1e-12
    K_POINTS = 11

    def __init__(self, solver_config: Optional[SolverConfig] = None, threads: Optional[int] = None):
        self.logger = logging.getLogger("CoherenceKit.CheckSuites")
        self.solver_config = solver_config or SolverConfig(threads=threads)
        self.threads = threads
        self._suites: Dict[str, Callable[[int, int, int], SuiteReport]] = {
            "nogo": self.nogo,
            "monotone": self.monotone,
            "theorem3": self.symmetric_sandwich,
        }

    def run(self, suite: str, dim: int, trials: int, seed: int) -> SuiteReport:
        if suite not in self._suites:
            raise PreconditionError(f"Unknown suite '{suite}' (choose from {', '.join(SUITES)})")
        if trials < 1:
            raise PreconditionError(f"trials must be >= 1, got {trials}")
        self.logger.info(f"Running suite {suite}: d={dim}, trials={trials}, seed={seed}")
        return self._suites[suite](dim, trials, seed)

    # ===== NO-GO =====

    def nogo(self, dim: int, trials: int, seed: int) -> SuiteReport:
        P = g_polynomial(dim)
        scale = float(dim)

        def one_pair(index: int) -> Tuple[int, float, bool]:
            rng = derive_rng(seed, index)
            if index % 2 == 0:
                psi1, psi2 = random_orthogonal_pair(dim, rng)
            else:
                psi1, psi2 = random_overlapping_pair(dim, self.OVERLAP_LIMIT, rng)
            try:
                witnesses = zero_coherence_witness(P, psi1, psi2, scale)
            except CoherenceKitError as e:
                self.logger.warning(f"Witness search failed for pair {index}: {e}")
                return 0, float("inf"), True
            worst = max((w.value for w in witnesses), default=0.0)
            missing = not witnesses and evaluate(P, psi2, scale) > 0
            return len(witnesses), worst, missing

        outcomes = run_ordered(one_pair, list(range(trials)), self.threads)
        total = sum(count for count, _, _ in outcomes)
        worst = max(value for _, value, _ in outcomes)
        missing = sum(1 for _, _, flag in outcomes if flag)
        vanishing = check_rank_deficient_vanishing(P, scale, trials, seed + 1)

        passed = missing == 0 and worst < WITNESS_TOLERANCE and not vanishing.violated
        lines = [
            f"pairs: {trials}",
            f"witnesses: {total}",
            f"pairs without witness: {missing}",
            f"max witness value: {worst:.3e}",
            f"max value on rank-deficient states: {vanishing.max_value:.3e}",
        ]
        return SuiteReport("nogo", passed, lines)

    # ===== MONOTONICITY =====

    def monotone(self, dim: int, trials: int, seed: int) -> SuiteReport:
        P = g_polynomial(dim)
        scale = float(dim)
        violations = 0
        worst = -np.inf
        for index in range(trials):
            psi, phi = sample_transformable_pair(dim, derive_rng(seed, index))
            report = monotonicity_witness(P, scale, psi, phi)
            worst = max(worst, report.target_value - report.source_value)
            if report.violated:
                violations += 1
                self.logger.info(f"Monotonicity violation at pair {index}: {report}")
        lines = [
            f"pairs: {trials}",
            f"violations: {violations}",
            f"max increase C(phi) - C(psi): {worst:.3e}",
        ]
        return SuiteReport("monotone", violations == 0, lines)

    # ===== SYMMETRIC SANDWICH =====

    def symmetric_sandwich(self, dim: int, trials: int, seed: int) -> SuiteReport:
        """
        Với mỗi K trên lưới, giá trị số phải nằm trong [C_G(K) - 1e-9, C_G(K) + 1e-3].
        (trials không dùng; số restart lấy từ SolverConfig)
        """
        P = g_polynomial(dim)
        scale = float(dim)
        cfg = replace(self.solver_config, seed=seed)
        passed = True
        max_gap = -np.inf
        max_recon = max_value_error = 0.0
        lines = []
        for K in np.linspace(1.0 / dim, 1.0, self.K_POINTS):
            K = float(K)
            rho = SymmetricState.from_overlap(dim, K).density()
            result = minimize_convex_roof(rho, P, scale, cfg)
            exact = cg_symmetric(dim, K)
            bound = cg_lower_bound(rho)
            gap = result.value - exact
            recon, value_error = audit(result, rho, P, scale)
            ok = (self.GAP_LOW <= gap <= self.GAP_HIGH
                  and bound <= result.value + self.BOUND_SLACK
                  and recon <= self.RECONSTRUCTION_LIMIT
                  and value_error <= self.VALUE_LIMIT)
            passed = passed and ok
            max_gap = max(max_gap, gap)
            max_recon = max(max_recon, recon)
            max_value_error = max(max_value_error, value_error)
            lines.append(f"K={K:.6f} roof={result.value:.6f} exact={exact:.6f} "
                         f"bound={bound:.6f} gap={gap:.3e}{'' if ok else '  <-- FAIL'}")
        lines.append(f"max gap: {max_gap:.3e}")
        lines.append(f"max reconstruction error: {max_recon:.3e}")
        lines.append(f"max value mismatch: {max_value_error:.3e}")
        return SuiteReport("theorem3", passed, lines)
