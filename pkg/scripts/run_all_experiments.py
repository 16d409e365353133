"""Run every experiment on the built-in sequences and write CSV and JSON reports.

Usage: python3 scripts/run_all_experiments.py [output_dir]
"""
import sys
from pathlib import Path

from ssgforms.experiments import EXPERIMENTS
from ssgforms.mp_sequence import Constant, Geometric, Harmonic

SEQUENCES = {
    "constant": Constant(0.25),
    "geometric": Geometric(0.5, 0.5),
    "harmonic": Harmonic(0.5),
}


def main(out_dir: str = "reports") -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    failed = []
    for seq_name, seq in SEQUENCES.items():
        for exp_name, fn in EXPERIMENTS.items():
            rep = fn(seq)
            stem = out / f"{exp_name}_{seq_name}"
            stem.with_suffix(".csv").write_text(rep.to_csv())
            stem.with_suffix(".json").write_text(rep.to_json() + "\n")
            status = "pass" if rep.passed else "FAIL"
            print(f"{status}  {exp_name:<10} {seq_name}")
            if not rep.passed:
                failed.append(f"{exp_name}/{seq_name}")
    if failed:
        print("failed:", ", ".join(failed))
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
