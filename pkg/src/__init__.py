"""
CoherenceKit - Thư viện tính toán độ đo coherence dạng đa thức

Version: 1.0.0
"""

__version__ = "1.0.0"
__author__ = "ntd237"
