"""
CoherenceKit - Polynomial Coherence Measures
Main Entry Point

Công cụ dòng lệnh tính độ đo coherence dạng đa thức, convex roof và kiểm tra majorization

Author: ntd237
Version: 1.0.0
"""

import sys
from pathlib import Path

# Add src to path để có thể import modules
sys.path.insert(0, str(Path(__file__).parent / "src"))
sys.path.insert(0, str(Path(__file__).parent))

from src.ui.cli import CoherenceCLI


def main(argv=None) -> int:
    """
    Entry point chính của ứng dụng.

    Returns:
        Exit code (0 ok, 1 check thất bại, 2 lỗi đầu vào, 3 audit thất bại, 4 lỗi nội bộ)
    """
    return CoherenceCLI().run(argv)


if __name__ == '__main__':
    sys.exit(main())
