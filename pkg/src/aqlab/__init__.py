"""Totally antisymmetric qudit states: construction, key sharing, state
sharing and state comparison."""

from .antisym import (
    antisymmetric_state,
    correlation_probability,
    generalized_bell,
    index_of_correlation,
    iterative_construction,
    levi_civita,
    post_projection_state,
)
from .core import (
    DensityMatrix,
    DimensionError,
    Ket,
    Operator,
    apply_on,
    measure_projective,
    partial_trace,
    tensor,
    von_neumann_entropy,
)
from .gates import collective, fourier, gxor, haar_random_unitary, recovery_unitary

__version__ = "0.1.0"
