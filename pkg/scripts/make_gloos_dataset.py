"""Regenerate the shipped synthetic cryostat heat-leak series.

    python scripts/make_gloos_dataset.py [OUT]

The file is a pure function of ``heatleak.GLOOS_SCENARIO``; the test suite
checks the shipped copy byte for byte against a fresh generation.
"""

import sys
from pathlib import Path

from collapsebounds.heatleak import gloos_synthetic, write_series

DEFAULT = Path(__file__).resolve().parents[1] / "src" / "collapsebounds" / "data" / "gloos_synthetic.csv"

if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT
    series = gloos_synthetic()
    write_series(series, out)
    print(f"wrote {len(series)} samples to {out}")
