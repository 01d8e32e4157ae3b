"""Exact checks of dimension lower bounds for linear approximation methods.

Submodules
----------
hilbert
    L^2(P) geometry on finite probability spaces.
bound
    The dimension lower bound, its Monte Carlo form, and Boas-Bellman.
boolean
    Hypercube, parity characters, fast Walsh-Hadamard transform.
kernel
    Kernel sections, ridge fits and the kernel sample-size wall.
mq
    Non-adaptive membership-query parity learning under label noise.
cli
    Experiment runner (``dimwall`` console script).
"""

__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402
from .hilbert import (  # noqa: E402
    DiscreteSpace,
    FuncVec,
    Subspace,
    gram,
    inner_product,
    norm_sq,
    orthonormalize,
    residual_sq,
)
from .bound import (  # noqa: E402
    BoundReport,
    SubspaceSampler,
    boas_bellman_check,
    coherence,
    epsilon_deterministic,
    theorem1_monte_carlo,
    theorem1_report,
)
from .boolean import (  # noqa: E402
    ParityIndex,
    all_parities,
    fwht,
    hypercube_space,
    k_sparse_parities,
    parity,
)
from .kernel import (  # noqa: E402
    builtin_kernels,
    fit,
    iid_design_sampler,
    kernel_section,
    method_subspace,
    mse_under_P,
    sample_size_lower_bound,
)
from .mq import learn_parity, parity_query_plan, recovery_rate  # noqa: E402
