"""
Command-line entry point.

    python app.py run --config separable --trials 10 --out results/separable
    python app.py selftest --seed 0
    python app.py plot --in results/separable
"""

import sys
from pathlib import Path

# Ensure src is in path
sys.path.insert(0, str(Path(__file__).parent))

from src.harness.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
