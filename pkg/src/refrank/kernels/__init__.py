"""Scanning kernels with compiled/pure backend selection.

The compiled extension is used when available; set ``REFRANK_PURE=1`` to
force the pure-Python backend (useful for debugging and benchmarking).
"""

import os

if os.environ.get("REFRANK_PURE"):
    from refrank.kernels import pure as _impl
else:
    try:
        from refrank.kernels import _speedups as _impl
    except ImportError:
        from refrank.kernels import pure as _impl

BACKEND = _impl.BACKEND
scan_ref_tags = _impl.scan_ref_tags
scan_bare_urls = _impl.scan_bare_urls
find_template_spans = _impl.find_template_spans

__all__ = ["BACKEND", "scan_ref_tags", "scan_bare_urls", "find_template_spans"]
