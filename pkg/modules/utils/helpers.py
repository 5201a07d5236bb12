from collections.abc import Sequence


def format_number(n: int | float, digits: int = 4) -> str:
    """Format number with thousand separators: 1520 -> '1,520', 0.18872 -> '0.1887'."""
    if isinstance(n, float):
        if n == float("inf"):
            return "inf"
        return f"{n:,.{digits}f}"
    return f"{n:,}"


def format_vector(values: Sequence[float], digits: int = 4) -> str:
    """Format a probability vector: [0.5, 0.5, 0, 0] -> '[0.5000, 0.5000, 0.0000, 0.0000]'."""
    return "[" + ", ".join(f"{float(v):.{digits}f}" for v in values) + "]"


def format_percent(ratio: float, digits: int = 1) -> str:
    return f"{ratio * 100:.{digits}f}%"


def truncate(text: str, max_len: int = 200) -> str:
    """Truncate text with ellipsis."""
    if len(text) <= max_len:
        return text
    return text[:max_len - 3] + "..."


def format_duration(seconds: float) -> str:
    """Format seconds to human-readable duration."""
    if seconds < 1:
        return f"{seconds * 1000:.0f}ms"
    if seconds < 60:
        return f"{seconds:.1f}s"
    whole = int(seconds)
    if whole < 3600:
        return f"{whole // 60}m {whole % 60}s"
    hours = whole // 3600
    minutes = (whole % 3600) // 60
    return f"{hours}h {minutes}m"


def format_bits(value: float) -> str:
    return f"{value:.4f} bits"
