"""Run-loop backend chosen at import: compiled Cython if built, else pure Python.

Set ``PERTURBED_TD_PURE=1`` to force the pure-Python loop.
"""

import importlib
import os

ALGO_CODES = {"td0": 0, "perturbed": 1, "etd": 2, "tdc": 3}


def load_backend(name):
    """Return the kernel module for ``"compiled"`` or ``"python"``."""
    if name == "compiled":
        return importlib.import_module("perturbed_td._kernel")
    if name == "python":
        return importlib.import_module("perturbed_td._kernel_py")
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    names = ["python"]
    try:
        load_backend("compiled")
    except ImportError:
        pass
    else:
        names.insert(0, "compiled")
    return names


if os.environ.get("PERTURBED_TD_PURE"):
    BACKEND = "python"
else:
    BACKEND = available_backends()[0]

active = load_backend(BACKEND)
run_block = active.run_block
weighted_error = active.weighted_error
