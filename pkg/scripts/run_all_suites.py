"""Run every verification suite at its default settings and write results/<suite>/."""

import argparse
import sys
import time
from pathlib import Path

from slabcgo import experiments
from slabcgo.cli import ExperimentConfig, run


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results")
    parser.add_argument("suites", nargs="*", default=list(experiments.SUITES))
    args = parser.parse_args(argv)
    failed = []
    for name in args.suites:
        t0 = time.perf_counter()
        code, result = run(ExperimentConfig(kind=name), str(Path(args.out) / name))
        print(f"{name:20s} {'PASS' if result.passed else 'FAIL'}  {time.perf_counter() - t0:6.1f} s")
        if code:
            failed.append(name)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
