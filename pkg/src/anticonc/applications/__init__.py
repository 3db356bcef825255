"""Subgraph counts in random graphs and Boolean functions computed by polynomials."""
from .booleanfn import (
    OrDistParams,
    or_agreement,
    or_distribution_sampler,
    or_mixture_pmf,
    or_polynomial,
    or_zero_probability,
    parity_correlation,
    parity_polynomial,
)
from .graphs import (
    PATTERNS,
    GraphSpec,
    PatternSpec,
    copies,
    count_copies,
    count_polynomial,
    packing_rank,
    subgraph_count_histogram,
)
