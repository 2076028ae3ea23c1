"""Small shared helpers: worker caps, atomic file writes, double factorials."""

import math
import os
import tempfile

ENV_THREADS = "NFNLS_THREADS"


def worker_count() -> int:
    """Worker cap for embarrassingly parallel loops.

    Defaults to 1 (fully sequential); the NFNLS_THREADS environment variable
    raises the cap.  Results never depend on the worker count.
    """
    raw = os.environ.get(ENV_THREADS, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def double_factorial(n: int) -> int:
    """(2k-1)!! style double factorial; n = -1 and n = 0 both give 1."""
    if n < -1:
        raise ValueError(f"double factorial undefined for n={n}")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def atomic_write_text(path: str, text: str) -> None:
    """Write text to path atomically (temp file + rename in same directory)."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_float(x: float) -> str:
    """Shortest round-trip decimal form, deterministic across runs."""
    if x != x or x in (math.inf, -math.inf):
        return str(x)
    return repr(float(x))
