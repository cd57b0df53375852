"""Small file helpers: atomic text writes and float formatting for CSV."""

from __future__ import annotations

import os
import tempfile


def format_float(x: float) -> str:
    # 17 significant digits round-trips a double exactly
    return "%.17g" % x


def atomic_write_text(path: str, text: str) -> None:
    """Write `text` to `path` so readers never observe a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
