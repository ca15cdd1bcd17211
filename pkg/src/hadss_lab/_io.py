"""Small output helpers shared by the writers."""

from __future__ import annotations

import contextlib


@contextlib.contextmanager
def text_sink(target):
    """Yield a text stream for ``target`` (a path or an open stream)."""
    if hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", newline="") as fh:
            yield fh
