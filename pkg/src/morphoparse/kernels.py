"""Backend selection for the LSTM recurrence.

The compiled extension is used when it imported cleanly; setting
MORPHOPARSE_PURE=1 (or a failed build) selects the numpy fallback.  Both
backends share one contract and are cross-checked in the test suite.
"""

from __future__ import annotations

import os

from . import _lstm_numpy

if os.environ.get("MORPHOPARSE_PURE", "") not in ("", "0"):
    _impl = _lstm_numpy
else:
    try:
        from . import _lstm_fast as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _lstm_numpy

recurrent_forward = _impl.recurrent_forward
recurrent_backward = _impl.recurrent_backward


def backend() -> str:
    return _impl.BACKEND
