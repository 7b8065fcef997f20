AVAILABLE_COMMANDS = """bounds, compositions, orbit, complexity, saddles, report"""

COMMAND_BOUNDS = """Evaluate the analytic entropy bound and every inequality of its chain.
Prints the constants as CSV (or the full report with --json). Usage:

`stadium bounds [--j-max 40] [--json]`
"""

COMMAND_COMPOSITIONS = """Tabulate the exact signed-composition counts Q(j) against their bounds. Usage:

`stadium compositions --j-max 40`
"""

COMMAND_ORBIT = """Iterate the billiard map from a phase point and dump the collisions. Usage:

`stadium orbit --l 2 --side L --coord 3.14159 --theta 0 --steps 10`

Arc coordinates are polar angles about the semicircle centre; flat coordinates are x.
"""

COMMAND_COMPLEXITY = """Sample the coded language and report complexity statistics. Usage:

`stadium complexity --l 2 --n-max 10 --samples 100000 --seed 0`

Optional: `--window <n>` codes longer orbits, `--measure liouville` weights by cos(theta).
"""

COMMAND_SADDLES = """Enumerate saddle connections and audit their count against the composition bound. Usage:

`stadium saddles --l 2 --max-len 6 --grid 200000`
"""

COMMAND_REPORT = """Run every experiment and emit a single JSON bundle. Usage:

`stadium report --config experiment.yaml --out report.json`
"""

HELP = {
    "bounds": COMMAND_BOUNDS,
    "compositions": COMMAND_COMPOSITIONS,
    "orbit": COMMAND_ORBIT,
    "complexity": COMMAND_COMPLEXITY,
    "saddles": COMMAND_SADDLES,
    "report": COMMAND_REPORT,
}
