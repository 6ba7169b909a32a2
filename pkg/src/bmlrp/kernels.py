"""Kernel selection: the compiled extension if it imports, else pure Python.

Set ``BMLRP_PURE=1`` to force the Python kernels.
"""

import os

from . import _kernel_py as py

try:
    from . import _kernel as ext
except ImportError:  # extension not built
    ext = None

active = py if ext is None or os.environ.get("BMLRP_PURE") == "1" else ext
NAME = "python" if active is py else "compiled"
