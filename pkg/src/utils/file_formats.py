"""
File Formats - Đọc/ghi file JSON (state, matrix, polynomial, decomposition) và CSV đường cong

- Số phức luôn là cặp [re, im], không bao giờ là chuỗi
- JSON giữ đủ độ chính xác (repr của float), CSV cố định 6 chữ số thập phân
- Mọi file đều UTF-8
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, List, Sequence, Union

import numpy as np

from src.core.convex_roof import Decomposition
from src.core.errors import CoherenceKitError, StateFileError
from src.core.poly_measure import HomogeneousPolynomial
from src.core.quantum_state import DensityMatrix, PureState, pure_density, validate_density, validate_state
from src.core.symmetry_twirl import CurveRow

logger = logging.getLogger("CoherenceKit.FileFormats")

PathLike = Union[str, Path]
CURVE_HEADER = ["K", "cbar_g", "cg"]


# ===== JSON HELPERS =====

def _load_json(path: PathLike) -> Any:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise StateFileError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e


def _dump_json(path: PathLike, data: Any):
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")
    logger.debug(f"Wrote {path}")


def _pair(value: Any, path: PathLike, where: str) -> complex:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
        raise StateFileError(f"{path}: {where}: expected [re, im] pair, got {value!r}")
    return complex(float(value[0]), float(value[1]))


def _vector(values: Any, path: PathLike, where: str) -> np.ndarray:
    if not isinstance(values, list) or not values:
        raise StateFileError(f"{path}: {where}: expected a non-empty list of [re, im] pairs")
    return np.array([_pair(v, path, f"{where}[{i}]") for i, v in enumerate(values)], dtype=complex)


def _pairs(vector: np.ndarray) -> List[List[float]]:
    return [[float(a.real), float(a.imag)] for a in np.asarray(vector, dtype=complex)]


def _field(data: Any, key: str, path: PathLike) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise StateFileError(f"{path}: missing field '{key}'")
    return data[key]


# ===== STATES =====

def read_state_file(path: PathLike) -> Union[PureState, DensityMatrix]:
    """
    {"dim": d, "amplitudes": [[re, im], ...]} -> PureState
    {"dim": d, "matrix": [[[re, im], ...], ...]} -> DensityMatrix

    Raises:
        StateFileError: sai cấu trúc hoặc không qua kiểm tra hợp lệ
    """
    data = _load_json(path)
    dim = _field(data, "dim", path)
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise StateFileError(f"{path}: dim: expected an integer, got {dim!r}")

    if "amplitudes" in data:
        amplitudes = _vector(data["amplitudes"], path, "amplitudes")
        if amplitudes.size != dim:
            raise StateFileError(f"{path}: amplitudes: expected {dim} entries, got {amplitudes.size}")
        try:
            return validate_state(amplitudes)
        except CoherenceKitError as e:
            raise StateFileError(f"{path}: amplitudes: {e}") from e

    if "matrix" in data:
        rows = data["matrix"]
        if not isinstance(rows, list) or len(rows) != dim:
            raise StateFileError(f"{path}: matrix: expected {dim} rows")
        matrix = np.zeros((dim, dim), dtype=complex)
        for i, row in enumerate(rows):
            entries = _vector(row, path, f"matrix[{i}]")
            if entries.size != dim:
                raise StateFileError(f"{path}: matrix[{i}]: expected {dim} entries, got {entries.size}")
            matrix[i] = entries
        try:
            return validate_density(matrix)
        except CoherenceKitError as e:
            raise StateFileError(f"{path}: matrix: {e}") from e

    raise StateFileError(f"{path}: expected field 'amplitudes' or 'matrix'")


def read_pure_state(path: PathLike) -> PureState:
    state = read_state_file(path)
    if not isinstance(state, PureState):
        raise StateFileError(f"{path}: expected a pure state ('amplitudes'), got a density matrix")
    return state


def read_density(path: PathLike) -> DensityMatrix:
    """Đọc ma trận mật độ; file 'amplitudes' được chuyển thành |ψ><ψ|."""
    state = read_state_file(path)
    return pure_density(state) if isinstance(state, PureState) else state


def write_state(path: PathLike, psi: PureState):
    _dump_json(path, {"dim": psi.dim, "amplitudes": _pairs(psi.amplitudes)})


def write_matrix(path: PathLike, rho: DensityMatrix):
    _dump_json(path, {"dim": rho.dim, "matrix": [_pairs(row) for row in rho.entries]})


# ===== POLYNOMIALS =====

def read_polynomial(path: PathLike) -> HomogeneousPolynomial:
    data = _load_json(path)
    for key in ("dim", "degree", "power", "terms"):
        _field(data, key, path)
    if not isinstance(data["terms"], list):
        raise StateFileError(f"{path}: terms: expected a list")
    for i, term in enumerate(data["terms"]):
        _field(term, "exponents", f"{path}: terms[{i}]")
        _pair(_field(term, "coeff", f"{path}: terms[{i}]"), path, f"terms[{i}].coeff")
    try:
        return HomogeneousPolynomial.from_dict(data)
    except (CoherenceKitError, TypeError, ValueError) as e:
        raise StateFileError(f"{path}: {e}") from e


def write_polynomial(path: PathLike, P: HomogeneousPolynomial):
    _dump_json(path, P.to_dict())


# ===== DECOMPOSITIONS =====

def read_decomposition(path: PathLike) -> Decomposition:
    data = _load_json(path)
    probabilities = _field(data, "probabilities", path)
    states = _field(data, "states", path)
    if not isinstance(probabilities, list) or not isinstance(states, list):
        raise StateFileError(f"{path}: 'probabilities' and 'states' must be lists")
    for i, amps in enumerate(states):
        _vector(amps, path, f"states[{i}]")
    try:
        return Decomposition.from_dict(data)
    except (CoherenceKitError, TypeError, ValueError) as e:
        raise StateFileError(f"{path}: {e}") from e


def write_decomposition(path: PathLike, dec: Decomposition):
    _dump_json(path, dec.to_dict())


# ===== CURVES =====

def write_curve_csv(path: PathLike, rows: Sequence[CurveRow]):
    """Header `K,cbar_g,cg`, sáu chữ số thập phân."""
    with open(Path(path), "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CURVE_HEADER)
        for row in rows:
            writer.writerow([f"{row.K:.6f}", f"{row.cbar_g:.6f}", f"{row.cg:.6f}"])
    logger.debug(f"Wrote {len(rows)} curve rows to {path}")


def read_curve_csv(path: PathLike) -> List[CurveRow]:
    with open(Path(path), "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CURVE_HEADER:
            raise StateFileError(f"{path}: line 1: expected header {','.join(CURVE_HEADER)}, got {header}")
        rows = []
        for line, record in enumerate(reader, start=2):
            try:
                K, cbar, cg = (float(x) for x in record)
            except ValueError as e:
                raise StateFileError(f"{path}: line {line}: {e}") from e
            rows.append(CurveRow(K, cbar, cg))
    return rows
