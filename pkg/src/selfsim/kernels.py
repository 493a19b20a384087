"""Kernel selection.

The compiled extension is used when it imports; setting the environment
variable ``SELFSIM_PURE_PYTHON=1`` forces the fallback.
"""
import os

from selfsim import _pykernels

python = _pykernels

compiled = None
if not os.environ.get("SELFSIM_PURE_PYTHON"):
    try:
        from selfsim import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

active = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "python"

refine_partition = active.refine_partition
brute_force_fixed = active.brute_force_fixed
act_on_word = active.act_on_word
