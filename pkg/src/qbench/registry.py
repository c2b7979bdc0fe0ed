"""Benchmark names, file slugs and score directions."""

from __future__ import annotations

HIGHER_BETTER = "higher_better"
LOWER_BETTER = "lower_better"
DIRECTIONS = (HIGHER_BETTER, LOWER_BETTER)

# benchmark_name as it appears in parameter files -> short type used in record paths
BENCHMARK_SLUGS = {
    "BSEQ": "bseq",
    "EPLG": "eplg",
    "Mirror Circuits": "mirror_circuits",
    "CLOPS": "clops",
    "QML Kernel": "qml_kernel",
    "WIT": "wit",
    "Linear Ramp QAOA": "lr_qaoa",
    "Quantum Fourier Transform": "qft",
}
SLUG_NAMES = {v: k for k, v in BENCHMARK_SLUGS.items()}

DEFAULT_DIRECTIONS = {name: HIGHER_BETTER for name in BENCHMARK_SLUGS}
DEFAULT_DIRECTIONS["EPLG"] = LOWER_BETTER


def canonical_name(name: str) -> str:
    """Accept either the full benchmark name or its slug."""
    if name in BENCHMARK_SLUGS:
        return name
    key = name.strip().lower().replace("-", "_").replace(" ", "_")
    if key in SLUG_NAMES:
        return SLUG_NAMES[key]
    for full in BENCHMARK_SLUGS:
        if full.lower() == name.strip().lower():
            return full
    raise KeyError(f"unknown benchmark {name!r}")


def slug(name: str) -> str:
    return BENCHMARK_SLUGS[canonical_name(name)]
