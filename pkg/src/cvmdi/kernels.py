"""Backend selection for the key-rate kernels.

The compiled Cython extension is used when available; set CVMDI_PURE_PYTHON=1
to force the numpy fallback. Both backends expose the same functions and are
checked against each other in the test suite.
"""

import os

from . import _kernels_py

if os.environ.get("CVMDI_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND

g_entropy = _impl.g_entropy
block_symplectic_eigenvalues = _impl.block_symplectic_eigenvalues
block_mutual_information = _impl.block_mutual_information
block_holevo_reverse = _impl.block_holevo_reverse
block_key_rate = _impl.block_key_rate
equivalent_noise_general = _impl.equivalent_noise_general
scan_k_rates = _impl.scan_k_rates
