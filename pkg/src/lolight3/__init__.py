"""Compact Lorentzian 3-manifolds with a parallel lightlike vector field.

Metrics on quotients of R^3 by Heisenberg-type lattices are described by a
small spec (slope, Fourier coefficients, arithmetic certificates). The
package computes their curvature, reduces them to normal form, builds and
verifies affine maps, classifies the affine quotient group and deforms each
metric to a flat one.
"""

import os

# LOLIGHT3_THREADS caps the BLAS/OpenMP pools; it must be set before numpy loads
_threads = os.environ.get("LOLIGHT3_THREADS")
if _threads and _threads.isdigit() and int(_threads) > 0:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

from .errors import LolightError  # noqa: E402
from .model import ArithCertificates, LatticeSpec, MetricSpec  # noqa: E402

__version__ = "0.1.0"

__all__ = ["ArithCertificates", "LatticeSpec", "LolightError", "MetricSpec", "__version__"]
