"""Runtime selection between numba-compiled kernels and their pure-numpy twins.

Every hot kernel in the package ships in two versions that produce identical
results.  The environment variable IHOPLAB_BACKEND picks the path:

    auto   use numba when it imports, numpy otherwise (default)
    numba  require numba, raise if it is missing
    numpy  force the pure-numpy path

The variable is read on every dispatch so tests can flip it per call.
"""

import os

ENV_VAR = "IHOPLAB_BACKEND"

_VALID = ("auto", "numba", "numpy")

_numba_ok = None


def backend_choice() -> str:
    value = os.environ.get(ENV_VAR, "auto").strip().lower()
    if value not in _VALID:
        raise ValueError(f"{ENV_VAR} must be one of {_VALID}, got {value!r}")
    return value


def numba_available() -> bool:
    global _numba_ok
    if _numba_ok is None:
        try:
            import numba  # noqa: F401

            _numba_ok = True
        except ImportError:
            _numba_ok = False
    return _numba_ok


def use_numba() -> bool:
    """True when the current dispatch should take the numba path."""
    choice = backend_choice()
    if choice == "numpy":
        return False
    if choice == "numba":
        if not numba_available():
            raise RuntimeError(f"{ENV_VAR}=numba but numba is not importable")
        return True
    return numba_available()
