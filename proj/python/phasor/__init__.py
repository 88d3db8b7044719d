"""Phase-equivariant audio similarity engine.

Complex-valued song embeddings with a learned bilinear phase-aware metric,
plus zero-shot structure probes (beat tracking, phase linearity, chord probe).
"""

try:
    from ._phasor import *  # noqa: F401,F403
    from ._phasor import __doc__ as _core_doc  # noqa: F401
except ImportError:  # editable/dev layout: module sits on PYTHONPATH
    from _phasor import *  # noqa: F401,F403

__version__ = "0.1.0"
