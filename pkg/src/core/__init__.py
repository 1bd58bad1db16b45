"""
Core modules - Các module tính toán số học cốt lõi
(Core modules - Numerical library: states, measures, twirling, convex roof)
"""
