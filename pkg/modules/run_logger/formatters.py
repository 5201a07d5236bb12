"""Plain-text formatters for log events and reports."""
from datetime import datetime
from modules.utils.helpers import (
    format_bits, format_duration, format_number, format_percent, format_vector, truncate,
)

RULE = "-" * 40


class LogFormatter:
    @staticmethod
    def _now() -> str:
        return datetime.now().strftime("%H:%M:%S %d.%m.%Y")

    # ─── System Events ─────────────────────────────────────────────

    def format_system_event(self, event_type: str, details: str) -> str:
        return f"[SYSTEM] {event_type}\n{details}"

    def format_info(self, title: str, details: str) -> str:
        return f"{title}\n{details}" if details else title

    def format_warning(self, warning_type: str, details: str) -> str:
        return f"[WARNING] {warning_type}\n{details}"

    def format_error(self, error_type: str, error: Exception,
                     tb: str = "", context: dict = None) -> str:
        ctx = context or {}
        text = f"[ERROR] {error_type}: {error}"
        if ctx.get("module"):
            text += f"\nModule: {ctx['module']}"
        if ctx.get("function"):
            text += f"\nFunction: {ctx['function']}"
        if tb:
            text += f"\nTraceback:\n{truncate(tb, 1500)}"
        return text

    def format_critical(self, critical_type: str, details: str) -> str:
        return f"[CRITICAL] {critical_type}\n{details}"

    # ─── Designs ───────────────────────────────────────────────────

    def format_design_result(self, data: dict) -> str:
        lines = [
            f"Design: {data.get('method', '?')}  K={data.get('k', '?')}  N={data.get('n', '?')}",
            f"Objective: {format_number(float(data.get('objective', 0.0)), 7)} bits/symbol",
            f"Iterations: {data.get('iterations', 0)}",
        ]
        if "expected_bits" in data:
            lines.append(f"Expected cost: {format_bits(data['expected_bits'])}")
        if "runtime_s" in data:
            lines.append(f"Runtime: {format_duration(data['runtime_s'])}")
        for k, q in enumerate(data.get("codebooks", [])):
            lines.append(f"  q{k} = {format_vector(q)}")
        return "\n".join(lines)

    def format_experiment_row(self, row: dict) -> str:
        return (
            f"{row['scenario']} n={row['n']} k_or_alpha={row['k_or_alpha']} "
            f"{row['method']}: {format_number(float(row['expected_bits']))} bits"
        )

    def format_savings_summary(self, data: dict) -> str:
        lines = [f"Savings vs self-decodable ({data.get('scenario', '?')})", RULE]
        for entry in data.get("entries", []):
            lines.append(
                f"n={entry['n']} {entry['label']}: {entry['method']} "
                f"{format_number(entry['bits'])} vs {format_number(entry['baseline'])} "
                f"-> {format_percent(entry['savings'])}"
            )
        return "\n".join(lines)

    # ─── Demo ──────────────────────────────────────────────────────

    def format_demo_report(self, data: dict) -> str:
        lines = ["EDGE SOURCE CODING DEMO", RULE]
        for n, spv in enumerate(data.get("spvs", []), start=1):
            lines.append(f"C{n}: p = {format_vector(spv, 2)}")
        lines.append(f"L = {data.get('L')}")

        for pref in data.get("preferences", []):
            lines += [
                RULE,
                f"{pref['name']}: f = {format_vector(pref['probs'], 2)}",
                f"Single-codebook optimum: {format_vector(pref['single_codebook'])}",
                f"Expected cost (K=1): {format_bits(pref['single_bits'])}",
            ]
            for k, q in enumerate(pref.get("design_codebooks", [])):
                lines.append(f"K={len(pref['design_codebooks'])} codebook {k}: {format_vector(q)}")
            lines.append(f"Expected cost (K={len(pref.get('design_codebooks', []))}): "
                         f"{format_bits(pref['design_bits'])}")

        trip = data.get("round_trip")
        if trip:
            lines += [
                RULE,
                "Round trip (Pref 1)",
                f"Item: {' '.join(str(s) for s in trip['symbols'])}",
                f"Payload: {trip['payload_bits']} bits  Total: {trip['total_bits']} bits",
                f"Decoded OK: {trip['ok']}",
            ]
        return "\n".join(lines)
