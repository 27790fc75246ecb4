"""Text formats: the initial-state mini-language and CSV/JSON output."""

import csv
import json
import logging
import math
import re

import numpy as np

from .errors import PolwalkError
from .walk import WalkState

__all__ = ["parse_state", "format_state", "fmt", "write_csv", "write_json", "jsonable"]

log = logging.getLogger(__name__)

NORM_WARN_TOL = 1e-6
SIG_DIGITS = 12

_COIN = {"0": 0, "1": 1, "c0": 0, "c1": 1}


def _parse_amp(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise PolwalkError(f"bad amplitude {text!r}; expected re+imj") from None


def parse_state(text: str, warn: bool = True) -> WalkState:
    """Parse comma-separated ``amplitude:position:coin`` terms.

    Amplitudes may be complex (``0.6+0.8j``), coins are ``0``/``1`` or
    ``c0``/``c1``. The result is normalized; a warning is logged if the
    input norm is off by more than 1e-6.
    """
    terms = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.rsplit(":", 2)
        if len(parts) != 3:
            raise PolwalkError(f"bad term {chunk!r}; expected amplitude:position:coin")
        amp, pos, coin = parts
        if not re.fullmatch(r"[+-]?\d+", pos.strip()):
            raise PolwalkError(f"bad position {pos!r} in {chunk!r}")
        if coin.strip().lower() not in _COIN:
            raise PolwalkError(f"bad coin {coin!r} in {chunk!r}; expected c0 or c1")
        terms.append((_parse_amp(amp), int(pos), _COIN[coin.strip().lower()]))
    if not terms:
        raise PolwalkError("empty state specification")
    norm = _summed_norm(terms)
    if warn and abs(norm - 1.0) > NORM_WARN_TOL:
        log.warning("initial state norm is %.9g, renormalizing", norm)
    return WalkState.from_terms(terms, normalize=True)


def _summed_norm(terms) -> float:
    # repeated (position, coin) pairs are summed by from_terms, so sum first
    acc = {}
    for a, x, c in terms:
        acc[(x, c)] = acc.get((x, c), 0) + a
    return math.sqrt(sum(abs(v) ** 2 for v in acc.values()))


def format_state(state: WalkState) -> str:
    """Inverse of :func:`parse_state` (up to number formatting)."""
    out = []
    for x, (a, b) in state.as_dict().items():
        for amp, c in ((a, 0), (b, 1)):
            if amp != 0:
                out.append(f"{fmt(amp)}:{x}:c{c}")
    return ", ".join(out)


def fmt(x) -> str:
    """Number with 12 significant digits; complex as re+imj."""
    if x is None:
        return ""
    if isinstance(x, (complex, np.complexfloating)):
        z = complex(x)
        if z.imag == 0:
            return fmt(z.real)
        sign = "+" if z.imag >= 0 else "-"
        return f"{z.real:.{SIG_DIGITS}g}{sign}{abs(z.imag):.{SIG_DIGITS}g}j"
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{SIG_DIGITS}g}"
    return str(x)


def write_csv(path, columns, rows, header_comment=None):
    """Write dict rows; every number goes through :func:`fmt`."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row.get(c)) for c in columns])


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples into JSON-friendly values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(f"{v:.{SIG_DIGITS}g}") if math.isfinite(v) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
