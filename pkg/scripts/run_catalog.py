"""Run every shipped scenario and write its CSVs and summary under an output directory.

    python scripts/run_catalog.py [OUT_DIR]
"""

import sys
from pathlib import Path

from kato_growth.harness import run
from kato_growth.scenario import load_scenario, shipped_scenarios


def main(out: Path) -> int:
    bad = 0
    for path in shipped_scenarios():
        sc = load_scenario(path)
        rep = run(sc, out / sc.name)
        want = 0 if sc.expect_exit is None else sc.expect_exit
        bad += rep.exit_code != want
        print(f"{sc.name:<22s} exit {rep.exit_code} (expected {want}) {rep.wall_time:6.2f} s  -> {out / sc.name}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(Path(sys.argv[1] if len(sys.argv) > 1 else "catalog_out")))
