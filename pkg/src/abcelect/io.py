"""Election, committee, trace and report files.

Weights are written as integers when integral, as decimal strings when the
fraction has a finite decimal expansion and as ``"p/q"`` otherwise, so a
file always reproduces the exact weights it was written from.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np

from .election import Election, ElectionError, as_fraction
from .rules import SelectionTrace, canonical_rule


class ParseError(ValueError):
    """Malformed input file; ``line``/``col`` locate JSON syntax errors."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(message + where)
        self.line, self.col = line, col


def format_weight(w: Fraction):
    if w.denominator == 1:
        return w.numerator
    d = w.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d == 1:
        digits = 0
        while (w * 10 ** digits).denominator != 1:
            digits += 1
        scaled = abs(int(w * 10 ** digits))
        sign = "-" if w < 0 else ""
        return f"{sign}{scaled // 10 ** digits}.{scaled % 10 ** digits:0{digits}d}"
    return f"{w.numerator}/{w.denominator}"


def load_json(path) -> object:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from exc


def election_from_json(data) -> Election:
    if not isinstance(data, dict):
        raise ParseError("election file must hold a JSON object")
    try:
        voters = data["voters"]
        candidates = [str(c) for c in data["candidates"]]
        k = data["k"]
        if not isinstance(k, int) or isinstance(k, bool):
            raise ParseError("k must be an integer")
        cap = data.get("ballot_cap")
        if cap is not None and (not isinstance(cap, int) or isinstance(cap, bool)):
            raise ParseError("ballot_cap must be an integer or null")
        ids, weights, ballots = [], [], []
        for v in voters:
            ids.append(str(v["id"]))
            weights.append(as_fraction(v["weight"]))
            approvals = v["approvals"]
            if not all(isinstance(c, int) and not isinstance(c, bool) for c in approvals):
                raise ParseError(f"voter {v['id']!r}: approvals must be candidate indices")
            ballots.append(tuple(approvals))
    except ElectionError as exc:
        raise ParseError(str(exc)) from exc
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing or malformed field: {exc}") from exc
    return Election(tuple(candidates), tuple(ids), tuple(weights), tuple(ballots), k, cap,
                    dict(data.get("meta") or {}))


def election_to_json(election: Election) -> dict:
    return {
        "meta": election.meta,
        "k": election.k,
        "ballot_cap": election.ballot_cap,
        "candidates": list(election.candidates),
        "voters": [{"id": v, "weight": format_weight(w), "approvals": list(b)}
                   for v, w, b in zip(election.voters, election.exact_weights, election.approvals)],
    }


def read_election(path) -> Election:
    return election_from_json(load_json(path))


def dumps(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def write_text(path, text: str) -> None:
    """Write atomically: temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def write_election(path, election: Election) -> None:
    write_text(path, dumps(election_to_json(election)))


def committee_to_json(election: Election, rule: str, committee, allow_copies: bool = False) -> dict:
    return {"rule": rule, "k": len(committee), "allow_copies": allow_copies,
            "committee": [election.candidates[c] for c in committee]}


def committee_from_json(data, election: Election) -> tuple[str, list[int]]:
    try:
        return canonical_rule(data["rule"]), [election.candidate_index(c) for c in data["committee"]]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed committee file: {exc}") from exc


def trace_from_json(data, election: Election | None = None) -> SelectionTrace:
    try:
        return SelectionTrace.from_json(data, election)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed trace file: {exc}") from exc


def format_value(x) -> str:
    if x is None:
        return "none"
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def csv_text(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow(["" if c is None else c if isinstance(c, str) else format_value(c) for c in row])
    return buf.getvalue()


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


__all__ = [
    "ParseError", "format_weight", "load_json", "election_from_json", "election_to_json",
    "read_election", "write_election", "dumps", "write_text", "committee_to_json",
    "committee_from_json", "trace_from_json", "format_value", "csv_text", "read_csv",
]
