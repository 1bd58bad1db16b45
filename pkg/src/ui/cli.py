"""
CLI - Giao diện dòng lệnh của CoherenceKit

Các lệnh: measure, symmetric, roof, witness, twirl, check, config
Exit code: 0 thành công, 1 check-suite thất bại, 2 lỗi đầu vào, 3 audit thất bại, 4 lỗi nội bộ
"""

import argparse
import json
import logging
import sys
import time
from dataclasses import replace
from typing import Callable, Dict, List, Optional, TextIO

from src import __version__
from src.config.config_manager import ConfigManager
from src.core.check_suites import SUITES, CheckRunner
from src.core.convex_roof import audit, minimize_convex_roof
from src.core.errors import CoherenceKitError, DimensionMismatch
from src.core.poly_measure import (
    CoherenceMeasure,
    c_l1_pure,
    g_measure,
    g_polynomial,
    zero_coherence_witness,
)
from src.core.quantum_state import PureState, dephased_rank
from src.core.symmetry_twirl import cg_lower_bound, overlap_K, sweep_symmetric_curve, twirl
from src.utils.file_formats import (
    read_density,
    read_polynomial,
    read_pure_state,
    write_curve_csv,
    write_decomposition,
    write_matrix,
)
from src.utils.logger import setup_logger

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT_ERROR = 2
EXIT_AUDIT_FAILURE = 3
EXIT_INTERNAL_ERROR = 4


def _fmt_value(value: float) -> str:
    """12 chữ số có nghĩa; 0 in ra là "0"."""
    return "0" if value == 0 else f"{value:#.12g}"


def _fmt_state(psi: PureState) -> str:
    return "(" + ", ".join(f"{a.real:+.6f}{a.imag:+.6f}j" for a in psi.amplitudes) + ")"


class CoherenceCLI:
    """
    Front end dòng lệnh: parse cờ, gọi thư viện, in báo cáo ra stdout.
    """

    # Tham số cấu hình cố định ở đầu file
    RECONSTRUCTION_LIMIT = 1e-8
    VALUE_LIMIT = 1e-12
    DEFAULT_CURVE_POINTS = 101
    DEFAULT_TRIALS = 100
    DEFAULT_CHECK_DIM = 3

    def __init__(self, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None):
        self.logger = logging.getLogger("CoherenceKit.CLI")
        self.stdout = stdout
        self.stderr = stderr
        self.config: Optional[ConfigManager] = None
        self.parser = self.build_parser()
        self._commands: Dict[str, Callable[[argparse.Namespace], int]] = {
            "measure": self.cmd_measure,
            "symmetric": self.cmd_symmetric,
            "roof": self.cmd_roof,
            "witness": self.cmd_witness,
            "twirl": self.cmd_twirl,
            "check": self.cmd_check,
            "config": self.cmd_config,
        }

    # ===== OUTPUT =====

    def echo(self, text: str = ""):
        print(text, file=self.stdout or sys.stdout)

    def error(self, text: str):
        print(f"error: {text}", file=self.stderr or sys.stderr)

    # ===== PARSER =====

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog="coherence-kit",
            description="Polynomial coherence measures: evaluation, convex roofs, witnesses, majorization checks",
        )
        parser.add_argument("--version", action="version", version=f"CoherenceKit {__version__}")
        parser.add_argument("-v", "--verbose", action="count", default=0,
                            help="Log INFO (-v) or DEBUG (-vv) to stderr")
        parser.add_argument("--timing", action="store_true", help="Print elapsed-time line")
        parser.add_argument("--threads", type=int, default=None,
                            help="Worker threads (CLI > env:COHERENCE_KIT_THREADS > config > CPU count)")
        parser.add_argument("--config", default=None, help="Config file (default: user config dir)")
        parser.add_argument("--log-dir", default=None, help="Log directory (default: user log dir)")
        sub = parser.add_subparsers(dest="command", metavar="COMMAND")
        sub.required = True

        # measure
        p = sub.add_parser("measure", help="Evaluate a measure on a pure state")
        p.add_argument("--state", required=True, help="Pure state JSON file")
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--poly", help="Polynomial JSON file")
        group.add_argument("--g", action="store_true", help="G-coherence measure")
        group.add_argument("--l1", action="store_true", help="l1 measure (d=2)")
        p.add_argument("--scale", type=float, default=None,
                       help="Scale factor (default: d for --g, 1 for --poly)")

        # symmetric
        p = sub.add_parser("symmetric", help="Write the symmetric-state curve CSV")
        p.add_argument("--dim", type=int, required=True)
        p.add_argument("--points", type=int, default=self.DEFAULT_CURVE_POINTS)
        p.add_argument("--out", required=True, help="Output CSV file")

        # roof
        p = sub.add_parser("roof", help="Numerical convex roof of a density matrix")
        p.add_argument("--state", required=True, help="Density matrix (or pure state) JSON file")
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--g", action="store_true", help="G-coherence measure")
        group.add_argument("--poly", help="Polynomial JSON file")
        p.add_argument("--scale", type=float, default=None)
        p.add_argument("--restarts", type=int, default=None)
        p.add_argument("--size", type=int, default=None, help="Decomposition size (default rank + 2)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--witness", default=None, help="Write the witness decomposition JSON")

        # witness
        p = sub.add_parser("witness", help="Zero-coherence witnesses in a superposition family")
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--poly", help="Polynomial JSON file")
        group.add_argument("--g", action="store_true", help="G-coherence measure")
        p.add_argument("--dim", type=int, default=None, help="Dimension for --g (default: state dimension)")
        p.add_argument("--scale", type=float, default=None)
        p.add_argument("--state1", required=True)
        p.add_argument("--state2", required=True)

        # twirl
        p = sub.add_parser("twirl", help="Permutation twirl of a density matrix")
        p.add_argument("--state", required=True)
        p.add_argument("--sample", type=int, default=None, help="Average N random permutations")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True, help="Output matrix JSON file")

        # check
        p = sub.add_parser("check", help="Run a verification suite")
        p.add_argument("--suite", required=True, choices=SUITES)
        p.add_argument("--dim", type=int, default=self.DEFAULT_CHECK_DIM)
        p.add_argument("--trials", type=int, default=self.DEFAULT_TRIALS)
        p.add_argument("--seed", type=int, default=None)

        # config
        p = sub.add_parser("config", help="Show or initialise the configuration file")
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--show", action="store_true", help="Print the effective configuration")
        group.add_argument("--init", action="store_true", help="Write the default configuration file")

        return parser

    # ===== ENTRY =====

    def run(self, argv: Optional[List[str]] = None) -> int:
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            return int(e.code or 0)

        self.config = ConfigManager(args.config)
        if args.verbose >= 2:
            level = logging.DEBUG
        elif args.verbose == 1:
            level = logging.INFO
        else:
            level = self.config.log_level
        setup_logger("CoherenceKit", level=level, log_dir=args.log_dir)
        self.logger.info(f"CoherenceKit v{__version__}: command '{args.command}'")

        start = time.perf_counter()
        try:
            code = self._commands[args.command](args)
        except (CoherenceKitError, OSError, ValueError) as e:
            self.logger.debug("Input error", exc_info=True)
            self.error(str(e))
            return EXIT_INPUT_ERROR
        except KeyboardInterrupt:
            self.logger.info("Interrupted by user")
            return 130
        except Exception as e:
            self.logger.error(f"Fatal error: {e}", exc_info=True)
            self.error(f"internal error: {e}")
            return EXIT_INTERNAL_ERROR

        if args.timing:
            self.echo(f"elapsed: {time.perf_counter() - start:.3f} s")
        return code

    def _threads(self, args: argparse.Namespace) -> Optional[int]:
        return args.threads if args.threads is not None else self.config.threads

    # ===== COMMANDS =====

    def cmd_measure(self, args: argparse.Namespace) -> int:
        psi = read_pure_state(args.state)
        if args.l1:
            value, label = c_l1_pure(psi), "C_l1"
        else:
            measure = g_measure(psi.dim) if args.g else CoherenceMeasure(read_polynomial(args.poly))
            if args.scale is not None:
                measure = replace(measure, scale=args.scale)
            value, label = measure(psi), measure.label

        rank = dephased_rank(psi)
        self.echo(f"{label} = {_fmt_value(value)}")
        self.echo(f"dephased rank = {rank} (d = {psi.dim})")
        if args.g and rank < psi.dim:
            self.echo("note: dephased rank < d, so the G-coherence value is necessarily 0")
        return EXIT_OK

    def cmd_symmetric(self, args: argparse.Namespace) -> int:
        rows = sweep_symmetric_curve(args.dim, 1.0 / args.dim, 1.0, args.points)
        write_curve_csv(args.out, rows)
        self.echo(f"wrote {len(rows)} rows to {args.out}")
        return EXIT_OK

    def cmd_roof(self, args: argparse.Namespace) -> int:
        rho = read_density(args.state)
        if args.g:
            P, scale = g_polynomial(rho.dim), float(rho.dim) if args.scale is None else args.scale
        else:
            P, scale = read_polynomial(args.poly), 1.0 if args.scale is None else args.scale
        if P.dim != rho.dim:
            raise DimensionMismatch(f"Polynomial dimension {P.dim} does not match state dimension {rho.dim}")

        cfg = self.config.solver_config(
            restarts=args.restarts,
            seed=args.seed,
            decomposition_size=args.size,
            threads=self._threads(args),
        )
        result = minimize_convex_roof(rho, P, scale, cfg)
        recon, value_error = audit(result, rho, P, scale)
        if recon > self.RECONSTRUCTION_LIMIT or value_error > self.VALUE_LIMIT:
            self.logger.error(f"Witness audit failed: reconstruction {recon:.3e}, value mismatch {value_error:.3e}")
            self.error("witness decomposition failed its own audit")
            return EXIT_AUDIT_FAILURE

        self.echo(f"roof value = {result.value:.6f}")
        if args.g:
            bound = cg_lower_bound(rho)
            self.echo(f"lower bound = {bound:.6f}")
            self.echo(f"gap = {result.value - bound:.6f}")
        self.echo(f"decomposition size = {result.decomposition.size}")
        self.echo(f"best restart = {result.restart_index} of {len(result.restart_values)}")
        self.echo(f"reconstruction error = {recon:.1e}")
        if args.witness:
            write_decomposition(args.witness, result.decomposition)
            self.echo(f"witness written to {args.witness}")
        return EXIT_OK

    def cmd_witness(self, args: argparse.Namespace) -> int:
        psi1 = read_pure_state(args.state1)
        psi2 = read_pure_state(args.state2)
        if args.g:
            P = g_polynomial(args.dim or psi1.dim)
            scale, label = float(P.dim) if args.scale is None else args.scale, "C_G"
        else:
            P = read_polynomial(args.poly)
            scale, label = 1.0 if args.scale is None else args.scale, "C_p"

        witnesses = zero_coherence_witness(P, psi1, psi2, scale, self.config.root_max_iterations)
        self.echo(f"witnesses: {len(witnesses)}")
        for i, w in enumerate(witnesses, start=1):
            omega = "inf (psi2)" if w.omega is None else f"{w.omega.real:+.6f}{w.omega.imag:+.6f}j"
            self.echo(f"[{i}] omega = {omega}")
            self.echo(f"    state = {_fmt_state(w.state)}")
            self.echo(f"    {label} = {w.value:.3e}")
        return EXIT_OK

    def cmd_twirl(self, args: argparse.Namespace) -> int:
        rho = read_density(args.state)
        out = twirl(rho, samples=args.sample, seed=args.seed, threads=self._threads(args))
        write_matrix(args.out, out)
        self.echo(f"K before = {overlap_K(rho):.12f}")
        self.echo(f"K after = {overlap_K(out):.12f}")
        self.echo(f"mode = {'exact' if args.sample is None else f'sampled ({args.sample})'}")
        return EXIT_OK

    def cmd_check(self, args: argparse.Namespace) -> int:
        seed = args.seed if args.seed is not None else int(self.config.get("solver.seed", 7))
        threads = self._threads(args)
        runner = CheckRunner(self.config.solver_config(threads=threads), threads=threads)
        report = runner.run(args.suite, args.dim, args.trials, seed)
        self.echo(str(report))
        return EXIT_OK if report.passed else EXIT_VIOLATION

    def cmd_config(self, args: argparse.Namespace) -> int:
        if args.init:
            self.config.reset()
            if not self.config.save_config():
                self.error(f"could not write {self.config.config_file}")
                return EXIT_INPUT_ERROR
            self.echo(f"wrote default configuration to {self.config.config_file}")
            return EXIT_OK
        self.echo(json.dumps(self.config.config, indent=2, ensure_ascii=False))
        return EXIT_OK
