"""Text/JSON parsing and emission shared by the command line.

Every number written out goes through :func:`format_number` (15 significant
digits) so repeated runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from typing import IO, Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidDistribution, InvalidState
from .probability import ProbDist
from .quantum import DensityMatrix
from .segmentation import Block, SymbolSequence

SIG_DIGITS = 15


def round_sig(x: float) -> float:
    return float(f"{x:.{SIG_DIGITS}g}")


def format_number(x) -> str:
    """``x`` with 15 significant digits; integral values keep a ``.0``."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    s = f"{float(x):.{SIG_DIGITS}g}"
    if math.isfinite(float(x)) and not any(c in s for c in ".en"):
        s += ".0"
    return s


def jsonable(obj):
    """Recursively convert numpy types and round floats to 15 significant digits."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return round_sig(x) if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2) + "\n"


def write_csv(stream: IO[str], header: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])


def parse_vector(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError as exc:
        raise InvalidDistribution(f"cannot parse {text!r} as numbers") from exc


def parse_distribution(text: str) -> ProbDist:
    return ProbDist(parse_vector(text))


def parse_distributions(text: str) -> tuple[list[ProbDist], str]:
    """Distributions from a JSON array of arrays or one comma-separated line each.

    Returns the distributions and the detected format, ``"json"`` or ``"text"``.
    """
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            rows = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise InvalidDistribution(f"invalid JSON: {exc}") from exc
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise InvalidDistribution("JSON input must be an array of arrays")
        return [ProbDist(r) for r in rows], "json"
    lines = [ln for ln in stripped.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    return [parse_distribution(ln) for ln in lines], "text"


def format_rows(rows: Sequence[Sequence[float]], fmt: str) -> str:
    """Emit a list of number rows mirroring the input format."""
    if fmt == "json":
        return "[" + ", ".join("[" + ", ".join(format_number(v) for v in r) + "]" for r in rows) + "]\n"
    return "".join(",".join(format_number(v) for v in r) + "\n" for r in rows)


def parse_blocks(text: str) -> tuple[Block, ...]:
    """``"0.8,0.2@0;0.2,0.8@500"`` -> blocks starting at 0 and 500."""
    blocks = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        probs, sep, start = part.rpartition("@")
        if not sep:
            raise InvalidDistribution(f"block {part!r} is missing '@start'")
        try:
            pos = int(start)
        except ValueError as exc:
            raise InvalidDistribution(f"bad block start {start!r}") from exc
        blocks.append(Block(pos, parse_distribution(probs)))
    return tuple(blocks)


def read_sequences(text: str, alphabet: Optional[str] = None) -> list[SymbolSequence]:
    """One sequence per non-empty line; a shared alphabet inferred over the whole file."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if alphabet is None:
        alphabet = "".join(sorted(set("".join(lines))))
    return [SymbolSequence.from_string(ln, list(alphabet)) for ln in lines]


def parse_state(text: str) -> DensityMatrix:
    """Density matrix from ``{"d": d, "entries": [[re, im], ...]}`` (row-major)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidState(f"invalid state JSON: {exc}") from exc
    try:
        d = int(obj["d"])
        entries = [complex(re, im) for re, im in obj["entries"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidState("state JSON needs 'd' and 'entries' as [re, im] pairs") from exc
    if len(entries) != d * d:
        raise InvalidState(f"expected {d * d} entries for d={d}, got {len(entries)}")
    return DensityMatrix(np.array(entries).reshape(d, d))
