"""Regenerate the figure tables and the golden fixtures through the CLI.

Usage: python scripts/reproduce_figures.py [OUT_DIR]

Without OUT_DIR the tables are written to tests/fixtures, which is where the
golden comparisons in the test suite read them from.  Each table is plain
CSV; for example ``gnuplot -e "plot 'fig3.csv' using 3:(log(\\$7))"`` draws
ln T against d.
"""

import sys
import time
from pathlib import Path

from tunneltime.cli import PRESETS, main

# columns worth plotting for each figure: (x column, y columns)
PLOTTED = {
    "fig1": ("value", ("T_bar", "k_tr_over_k0", "k_ref_over_k0")),
    "fig2": ("value", ("x_tr_nm", "x_ref_nm")),
    "fig3": ("d_nm", ("T_bar",)),
    "fig4": ("d_nm", ("k_tr_over_k0",)),
    "fig5": ("d_nm", ("Jp_tr_nm", "Jp_ref_nm")),
}


def reproduce(out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in PRESETS:
        start = time.perf_counter()
        path = out_dir / f"{name}.csv"
        code = main(["scan", "--preset", name, "--out", str(path)])
        if code:
            return code
        x, ys = PLOTTED[name]
        print(f"{name}: {path} ({time.perf_counter() - start:.1f} s); plot {', '.join(ys)} "
              f"against {x}")
    return 0


if __name__ == "__main__":
    default = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
    sys.exit(reproduce(Path(sys.argv[1]) if len(sys.argv) > 1 else default))
