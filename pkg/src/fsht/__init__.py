"""Fast, backward stable conversion between spherical harmonic expansions
and bivariate Fourier series."""
import os

import numba

if "NUMBA_THREADING_LAYER" not in os.environ:
    try:
        from numba.np.ufunc import omppool  # noqa: F401
        numba.config.THREADING_LAYER = "omp"
    except ImportError:
        numba.config.THREADING_LAYER = "workqueue"

from .coeffs import (  # noqa: E402
    CoeffMatrix,
    Kind,
    layout_index,
    load_coeffs,
    normalize_columns,
    parity_shuffle,
    parity_unshuffle,
    save_coeffs,
)
from .lambda_fn import lam  # noqa: E402
from .transform import (  # noqa: E402
    Mode,
    SphPlan,
    eval_fourier_point,
    eval_sph_point,
    fourier2sph,
    load_plan,
    plan,
    save_plan,
    sph2fourier,
)

__version__ = "0.1.0"

__all__ = [
    "CoeffMatrix",
    "Kind",
    "Mode",
    "SphPlan",
    "eval_fourier_point",
    "eval_sph_point",
    "fourier2sph",
    "lam",
    "layout_index",
    "load_coeffs",
    "load_plan",
    "normalize_columns",
    "parity_shuffle",
    "parity_unshuffle",
    "plan",
    "save_coeffs",
    "save_plan",
    "sph2fourier",
]
