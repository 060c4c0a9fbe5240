"""Pauli-channel characterization workbench.

Everything here treats a Pauli channel through its error distribution over
the 4^n Pauli strings: exact small-n verification that Bell-pair sampling
reproduces that distribution, and the classical estimation stack built on
top of it (plug-in learning with exact sample-size planning, white-noise
testing, unseen entropy/support estimation, diamond distance).
"""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    LpParams,
    PauliDistribution,
    PauliString,
    ResourceLimitError,
    ShapeError,
    binary_entropy,
    decode,
    encode,
    fannes_audenaert_bound,
    load_channel,
    lp_distance,
    make_channel,
    save_channel,
    shannon_entropy,
    support_size,
)
from .quantum import (  # noqa: F401
    DensityMatrix,
    SampleBatch,
    apply_channel,
    bell_circuit_distribution,
    bell_outcome_distribution,
    choi_state,
    draw_samples,
    simulate_channel_from_samples,
)
