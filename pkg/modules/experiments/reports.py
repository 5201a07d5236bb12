"""CSV output and savings summaries for experiment rows."""
import csv
import math
from pathlib import Path

CSV_COLUMNS = (
    "scenario", "n", "k_or_alpha", "method", "seed", "restarts",
    "expected_bits", "objective_bits_per_symbol", "runtime_ms",
)
BASELINE = "self_decodable"


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: list[dict], path: Path | str) -> Path:
    """Rows in the given order, fixed columns, floats in repr form."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_cell(row[column]) for column in CSV_COLUMNS])
    return target


def read_csv(path: Path | str) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


class ReportGenerator:
    def __init__(self, logger=None):
        self.logger = logger

    @staticmethod
    def _label(scenario: str, value) -> str:
        return f"alpha={value}" if scenario == "fig4" else f"K={value}"

    def savings(self, rows: list[dict], scenario: str) -> dict:
        """Relative saving of every designed method against the
        self-decodable row of the same grid point."""
        groups: dict[tuple, dict[str, float]] = {}
        for row in rows:
            key = (row["scenario"], row["n"], row["k_or_alpha"])
            groups.setdefault(key, {})[row["method"]] = float(row["expected_bits"])

        entries = []
        for (name, n, value), methods in groups.items():
            baseline = methods.get(BASELINE)
            if baseline is None or baseline <= 0:
                continue
            for method, bits in methods.items():
                if method.startswith(BASELINE) or math.isinf(bits):
                    continue
                entries.append({
                    "scenario": name, "n": n, "label": self._label(scenario, value),
                    "method": method, "bits": bits, "baseline": baseline,
                    "savings": 1.0 - bits / baseline,
                })
        return {"scenario": scenario, "entries": entries}

    def best_savings(self, rows: list[dict], scenario: str) -> dict[str, float]:
        """Largest saving per method over the grid."""
        best: dict[str, float] = {}
        for entry in self.savings(rows, scenario)["entries"]:
            best[entry["method"]] = max(best.get(entry["method"], -math.inf), entry["savings"])
        return best

    def log_savings(self, rows: list[dict], scenario: str) -> dict:
        summary = self.savings(rows, scenario)
        if self.logger and summary["entries"]:
            self.logger.log_info("Savings", self.logger.formatter.format_savings_summary(summary))
        return summary
