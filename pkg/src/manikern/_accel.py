"""Accelerator backend selection.

The MANIKERN_ACCEL environment variable picks the implementation of the
hot numeric kernels at import time:

* ``auto`` (default) — jit-compiled backend when numba imports cleanly,
  pure-numpy fallback otherwise;
* ``numba`` — require the jit backend, raise if numba is unavailable;
* ``numpy`` — force the fallback, never import numba.

Every function is re-exported here so the rest of the package imports
from `_accel` only.  `backend_name()` reports which one is live.
"""

import os

from .errors import ConfigurationError

_MODE = os.environ.get("MANIKERN_ACCEL", "auto").strip().lower()

if _MODE not in ("auto", "numba", "numpy"):
    raise ConfigurationError(
        f"MANIKERN_ACCEL must be one of auto, numba, numpy; got {_MODE!r}"
    )

if _MODE == "numpy":
    from . import _hot_numpy as _impl
elif _MODE == "numba":
    try:
        from . import _hot_numba as _impl
    except ImportError as exc:
        raise ConfigurationError(
            "MANIKERN_ACCEL=numba but the numba backend failed to import"
        ) from exc
else:
    try:
        from . import _hot_numba as _impl
    except ImportError:
        from . import _hot_numpy as _impl

riesz_energy = _impl.riesz_energy
riesz_energy_forces = _impl.riesz_energy_forces
wendland_gram = _impl.wendland_gram
wendland_apply = _impl.wendland_apply
bessel_k_many = _impl.bessel_k_many


def backend_name():
    """Name of the live backend, ``"numba"`` or ``"numpy"``."""
    return _impl.BACKEND_NAME
