"""
Errors - Các exception của thư viện
(Library exceptions, one class per failure mode)
"""


class CoherenceKitError(Exception):
    """Base class cho mọi lỗi của CoherenceKit."""


# ===== STATE VALIDATION =====

class InvalidState(CoherenceKitError):
    """Ma trận/vector không phải trạng thái lượng tử hợp lệ."""


class NotNormalized(InvalidState):
    pass


class ZeroVector(InvalidState):
    pass


class DimensionTooSmall(CoherenceKitError):
    pass


class DimensionMismatch(CoherenceKitError):
    pass


class PreconditionError(CoherenceKitError):
    """Tham số đầu vào vi phạm điều kiện tiên quyết."""


# ===== LINEAR ALGEBRA =====

class NoConvergence(CoherenceKitError):
    pass


class NotAPermutation(CoherenceKitError):
    pass


class NotAnIsometry(CoherenceKitError):
    pass


class KrausNotTracePreserving(CoherenceKitError):
    pass


class ChannelNotIncoherent(CoherenceKitError):
    pass


# ===== POLYNOMIALS =====

class InvalidPolynomial(CoherenceKitError):
    pass


class ConstantPolynomial(CoherenceKitError):
    pass


class RootFindingDiverged(CoherenceKitError):
    pass


class StatesParallel(CoherenceKitError):
    pass


# ===== SYMMETRIC STATES / CONVEX ROOF =====

class KOutOfRange(CoherenceKitError):
    pass


class DimensionTooLargeForExact(CoherenceKitError):
    pass


class RankDeficientSpectrumMismatch(CoherenceKitError):
    pass


# ===== MAJORIZATION =====

class LengthMismatch(CoherenceKitError):
    pass


class NotTransformable(CoherenceKitError):
    pass


# ===== FILES =====

class StateFileError(CoherenceKitError):
    """Lỗi đọc file JSON/CSV; message gồm tên file và đường dẫn field."""
    pass
