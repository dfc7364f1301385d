"""Episode-kernel selection.

The compiled Cython kernel is preferred when present; the pure-Python
reference lane is the fallback. Override with MACSIM_BACKEND=pure or
MACSIM_BACKEND=compiled (the latter fails loudly if the extension is
missing). Both lanes are bit-identical by contract, enforced by the
parity test suite.
"""

from __future__ import annotations

import os

from . import episode as _pure

_choice = os.environ.get("MACSIM_BACKEND", "auto").strip().lower()
if _choice not in {"auto", "compiled", "pure"}:
    raise RuntimeError(
        f"MACSIM_BACKEND must be one of auto/compiled/pure, got {_choice!r}")

_compiled = None
if _choice in ("auto", "compiled"):
    try:
        from . import _kernel as _compiled  # type: ignore[attr-defined]
    except ImportError:
        if _choice == "compiled":
            raise RuntimeError(
                "MACSIM_BACKEND=compiled but the macsim._kernel extension "
                "is not built; reinstall with the Cython extension enabled")
        _compiled = None

_impl = _compiled if _compiled is not None else _pure

run_episode = _impl.run_episode


def backend_name() -> str:
    return "compiled" if _impl is _compiled and _compiled is not None else "pure"


def has_compiled_kernel() -> bool:
    return _compiled is not None
