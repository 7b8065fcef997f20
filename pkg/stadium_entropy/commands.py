import logging
import math
from dataclasses import asdict
from typing import Optional, TextIO, Tuple

from stadium_entropy import commands_help
from stadium_entropy.coding import code_point, format_word
from stadium_entropy.combinatorics import (
    FINAL_BOUND,
    BoundReport,
    count_Q,
    entropy_upper_bound,
    q_growth_report,
    q_upper_bound,
)
from stadium_entropy.config import ExperimentConfig
from stadium_entropy.dynamics import orbit
from stadium_entropy.errors import ConfigError, DomainError
from stadium_entropy.language import (
    code_separation_report,
    entropy_estimate,
    language_rows,
    language_words,
    sample_language,
)
from stadium_entropy.output import bundle, emit, format_csv, format_json, rows_of
from stadium_entropy.saddles import (
    bound_audit,
    count_N,
    saddle_growth_estimate,
    verify_uniqueness,
)
from stadium_entropy.table import Side, StadiumTable
from stadium_entropy.utils import int_le_bound
from stadium_entropy.wavefront import defocusing_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

ORBIT_COLUMNS = ("step", "side", "local_coord", "x", "y", "theta", "tau", "flags", "code")
COMPOSITION_COLUMNS = ("j", "k", "Q_exact", "Q_bound")
LANGUAGE_COLUMNS = (
    "n",
    "p_hat",
    "s_hat",
    "num_bispecial",
    "cassaigne_residual",
    "saturated",
    "left_unextendable",
    "right_unextendable",
    "entropy_estimate",
    "analytic_bound",
)
SADDLE_COLUMNS = ("start", "end", "code", "length", "weight", "launch_param", "residual")
AUDIT_COLUMNS = ("n", "N", "max_weight", "tight_bound", "conservative_bound")

# Minimum level count for the entropy slope
ENTROPY_MIN_LEVELS = 6


class Command:
    def __init__(
        self,
        config: ExperimentConfig,
        command: str,
        stream: Optional[TextIO] = None,
    ):
        """A subcommand requested on the command line.

        Args:
            config: Validated experiment parameters.

            command: The subcommand verb.

            stream: Where results go when no output path is configured
                (stdout by default).
        """
        self.config = config
        self.command = command
        self.stream = stream

    def process(self) -> int:
        """Run the command and return its exit code"""
        if self.command == "bounds":
            return self._bounds()
        elif self.command == "compositions":
            return self._compositions()
        elif self.command == "orbit":
            return self._orbit()
        elif self.command == "complexity":
            return self._complexity()
        elif self.command == "saddles":
            return self._saddles()
        elif self.command == "report":
            return self._report()
        return self._unknown_command()

    def _emit(self, text: str) -> None:
        emit(text, self.config.out, self.stream)

    @property
    def _table(self) -> StadiumTable:
        return StadiumTable(self.config.l)

    def _bounds(self) -> int:
        """Analytic bound chain"""
        report = self._bound_report()
        if self.config.json:
            self._emit(format_json(bundle({"bounds": report.as_dict()})))
        else:
            self._emit(format_csv(_bound_constant_rows(report), ("quantity", "value")))
        return EXIT_OK if report.passed else EXIT_CHECK_FAILED

    def _bound_report(self) -> BoundReport:
        return entropy_upper_bound(j_max=max(2, self.config.j_max), strict=False)

    def _compositions(self) -> int:
        """Exact composition counts against the AM-GM bound"""
        rows, passed = _composition_rows(self.config.j_max)
        if self.config.json:
            document = {"compositions": _composition_section(self.config.j_max, rows, passed)}
            self._emit(format_json(bundle(document)))
        else:
            self._emit(format_csv(rows, COMPOSITION_COLUMNS))
        if not passed:
            logger.error("Some Q(j, k) exceed their AM-GM bound")
        return EXIT_OK if passed else EXIT_CHECK_FAILED

    def _orbit(self) -> int:
        """Collision dump of a single orbit"""
        table = self._table
        try:
            pp = table.phase_point(Side(self.config.side), self.config.coord, self.config.theta)
        except DomainError as e:
            raise ConfigError(f"Invalid phase point: {e}")
        result = orbit(table, pp, self.config.steps, self.config.tol)

        rows = [_orbit_row(0, pp, "", frozenset(), self.config.tol)]
        for step, transit in enumerate(result.transits, start=1):
            rows.append(
                _orbit_row(
                    step,
                    transit.image,
                    transit.segment.tau,
                    transit.flags,
                    self.config.tol,
                )
            )
        if self.config.json:
            document = {"orbit": {"status": result.status, "message": result.message, "rows": rows}}
            self._emit(format_json(bundle(document)))
        else:
            self._emit(format_csv(rows, ORBIT_COLUMNS))
        if not result.ok:
            logger.error("Orbit stopped early (%s): %s", result.status, result.message)
            return EXIT_CHECK_FAILED
        return EXIT_OK

    def _complexity(self) -> int:
        """Sampled language statistics"""
        section = self._complexity_section()
        if self.config.json:
            self._emit(format_json(bundle({"complexity": section})))
        else:
            self._emit(format_csv(_with_estimate(section), LANGUAGE_COLUMNS))
        estimate = section.get("estimate")
        if estimate is not None:
            logger.info(
                "Entropy estimate %.6f over n=%s (analytic bound %.6f, reference %.6f)",
                estimate["slope"],
                estimate["window"],
                estimate["analytic_bound"],
                estimate["reference_lower"],
            )
        return EXIT_OK

    def _complexity_section(self, separation: bool = False) -> dict:
        config = self.config
        table = self._table
        ls = sample_language(
            table,
            config.n_max,
            config.samples,
            config.seed,
            window=config.window,
            measure=config.measure,
            threads=config.threads,
            tol=config.tol,
        )
        section = {
            "l": config.l,
            "samples": config.samples,
            "seed": config.seed,
            "window": ls.window,
            "measure": ls.measure,
            "skipped_singular": ls.skipped_singular,
            "skipped_ambiguous": ls.skipped_ambiguous,
            "rows": language_rows(ls),
            "words": language_words(ls),
        }
        if config.n_max >= ENTROPY_MIN_LEVELS:
            section["estimate"] = entropy_estimate(ls).as_dict()
        if separation or config.json:
            section["separation"] = [
                asdict(row) for row in code_separation_report(table, ls, tol=config.tol)
            ]
        return section

    def _saddles(self) -> int:
        """Saddle connection enumeration and count audit"""
        section, passed = self._saddle_section()
        if self.config.json:
            self._emit(format_json(bundle({"saddles": section})))
        else:
            self._emit(format_csv(section["connections"], SADDLE_COLUMNS))
        for row in section["audit"]:
            logger.info(
                "N(%d)=%d, 36 sum Q(j<n)=%d, 36 sum Q(j<=n+1)=%d",
                row["n"],
                row["N"],
                row["tight_bound"],
                row["conservative_bound"],
            )
        return EXIT_OK if passed else EXIT_CHECK_FAILED

    def _saddle_section(self) -> Tuple[dict, bool]:
        config = self.config
        count = count_N(self._table, config.max_len, config.grid, config.tol, config.threads)
        uniqueness = verify_uniqueness(count.connections, config.tol)
        audit = bound_audit(count, count_Q(config.max_len + 1))
        passed = uniqueness.unique and all(row.ok for row in audit)
        section = {
            "l": config.l,
            "grid": config.grid,
            "max_len": config.max_len,
            "N": count.counts,
            "unique": uniqueness.unique,
            "duplicates": [
                {"code": ":".join(key[2]), "launch_params": params}
                for key, params in uniqueness.duplicates.items()
            ],
            "audit": [
                dict(
                    rows_of([row], AUDIT_COLUMNS)[0],
                    ok=row.ok,
                    tight_ok=row.tight_ok,
                )
                for row in audit
            ],
            "growth": [{"n": n, "value": value} for n, value in saddle_growth_estimate(count)],
            "diagnostics": {
                "coarse_intervals": count.diagnostics.coarse_intervals,
                "unresolved": count.diagnostics.unresolved,
            },
            "connections": [sc.as_row() for sc in count.connections],
        }
        return section, passed

    def _report(self) -> int:
        """All experiments in one JSON bundle"""
        bounds = self._bound_report()
        composition_rows, compositions_passed = _composition_rows(self.config.j_max)
        growth = q_growth_report(max(10, self.config.j_max))
        saddles, saddles_passed = self._saddle_section()
        defocusing = defocusing_report(
            self._table, 10_000, self.config.seed, threads=self.config.threads
        )
        document = bundle(
            {
                "config": asdict(self.config),
                "bounds": bounds.as_dict(),
                "compositions": dict(
                    _composition_section(
                        self.config.j_max, composition_rows, compositions_passed
                    ),
                    growth=[asdict(row) for row in growth.rows],
                    growth_passed=growth.passed,
                ),
                "complexity": self._complexity_section(separation=True),
                "saddles": saddles,
                "defocusing": defocusing.as_dict(),
            }
        )
        self._emit(format_json(document))
        passed = (
            bounds.passed
            and compositions_passed
            and growth.passed
            and saddles_passed
            and not defocusing.violations
        )
        return EXIT_OK if passed else EXIT_CHECK_FAILED

    def _unknown_command(self) -> int:
        logger.error(
            "Unknown command '%s'. Available commands: %s",
            self.command,
            commands_help.AVAILABLE_COMMANDS,
        )
        return EXIT_USAGE


def _bound_constant_rows(report: BoundReport) -> list:
    rows = [
        {"quantity": name, "value": getattr(report, name)}
        for name in (
            "w",
            "w_residual",
            "a",
            "base",
            "base_identity",
            "final_bound",
            "log_bound",
        )
    ]
    rows.extend(
        {"quantity": f"check: {check.name}", "value": int(check.passed)}
        for check in report.checks
    )
    return rows


def _with_estimate(section: dict) -> list:
    """Language rows with the entropy estimate and the analytic bound repeated on each."""
    estimate = section.get("estimate")
    extra = {
        "entropy_estimate": estimate["slope"] if estimate else "",
        "analytic_bound": math.log(FINAL_BOUND),
    }
    return [dict(row, **extra) for row in section["rows"]]


def _composition_rows(j_max: int) -> Tuple[list, bool]:
    """One row per j: Q(j), the k of the largest Q(j, k) and j times the largest bound.

    The flag reports whether every single Q(j, k) respects its own bound.
    """
    counts = count_Q(j_max)
    rows = []
    passed = True
    for j in range(1, j_max + 1):
        bounds = [q_upper_bound(j, k) for k in range(1, j + 1)]
        exact = [counts.q(j, k) for k in range(1, j + 1)]
        passed = passed and all(int_le_bound(q, b) for q, b in zip(exact, bounds))
        rows.append(
            {
                "j": j,
                "k": 1 + max(range(j), key=exact.__getitem__),
                "Q_exact": counts.total(j),
                "Q_bound": j * max(bounds),
            }
        )
    return rows, passed


def _composition_section(j_max: int, rows: list, passed: bool) -> dict:
    counts = count_Q(j_max)
    return {
        "j_max": j_max,
        "rows": rows,
        "table": [
            {"j": j, "k": k, "Q": counts.q(j, k), "bound": q_upper_bound(j, k)}
            for j in range(1, j_max + 1)
            for k in range(1, j + 1)
        ],
        "passed": passed,
    }


def _orbit_row(step, pp, tau, flags, tol) -> dict:
    letters = sorted(code_point(pp, tol), key=lambda letter: letter.value)
    return {
        "step": step,
        "side": pp.side.value,
        "local_coord": pp.point.coord,
        "x": pp.point.x,
        "y": pp.point.y,
        "theta": pp.theta,
        "tau": tau,
        "flags": "|".join(sorted(flags)),
        "code": "/".join(format_word([letter]) for letter in letters),
    }
