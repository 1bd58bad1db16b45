"""
Build Script - Đóng gói CLI thành một file thực thi

Chạy script này để build với PyInstaller:

    python build.py

Output: dist/CoherenceKit (single file, console)
"""

import PyInstaller.__main__
import sys


def build():
    """
    Build file thực thi sử dụng PyInstaller.
    """
    print("=" * 60)
    print("Building CoherenceKit...")
    print("=" * 60)

    separator = ';' if sys.platform.startswith('win') else ':'

    # PyInstaller arguments
    args = [
        'main.py',
        '--onefile',                    # Đóng gói thành 1 file duy nhất
        '--console',                    # CLI: cần console cho stdout/stderr
        '--name=CoherenceKit',          # Tên file output
        '--clean',                      # Clean cache trước khi build

        # Add resources (config template)
        f'--add-data=resources{separator}resources',

        # scipy nạp lazy một số submodule
        '--hidden-import=scipy.optimize',
        '--hidden-import=mpmath',
    ]

    print("Running PyInstaller with arguments:")
    for arg in args:
        print(f"  {arg}")
    print()

    PyInstaller.__main__.run(args)

    print()
    print("=" * 60)
    print("Build complete!")
    print("Output: dist/CoherenceKit")
    print("=" * 60)


if __name__ == '__main__':
    try:
        build()
    except Exception as e:
        print(f"Build failed: {e}", file=sys.stderr)
        sys.exit(1)
