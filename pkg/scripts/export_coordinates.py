"""Write plot-ready CSVs: vertex coordinates of V_m and the E_{R,m} edge list.

Usage: python3 scripts/export_coordinates.py M [alpha] [output_dir]
"""
import sys
from pathlib import Path

from ssgforms.mp_sequence import Geometric
from ssgforms.network import build_ssg
from ssgforms.topology import EmbeddingParams, coordinates_csv


def main(m: str, alpha: str = "0.5", out_dir: str = "reports") -> int:
    level = int(m)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"coordinates_m{level}.csv").write_text(coordinates_csv(level, EmbeddingParams(float(alpha))))
    (out / f"edges_m{level}.csv").write_text(build_ssg(Geometric(0.5, 0.5), level).to_csv())
    print(f"wrote {out}/coordinates_m{level}.csv and {out}/edges_m{level}.csv")
    return 0


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    sys.exit(main(*sys.argv[1:]))
