"""Line-oriented text format for network data.

    # comment
    network NAME
    materials 2
    resources 1
    activities 2
    lambda:
    3/2 1/2
    R:
    2 1
    2 -1
    A:
    1 1
    gamma 0:          # optional, j = 0 is the exogenous input
    1 0
    0 1
    family gaussian   # optional: deterministic | gaussian | bernoulli
    vector q:         # optional named m-vectors
    1 0

Matrix and vector entries are exact rationals (``-3/4``, ``2``); gamma
entries are floats.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .ratmath import Matrix, format_rational, parse_rational
from .workload import NetworkData

__all__ = ["NetworkFile", "ParseError", "DimensionMismatch", "NegativeEntryInA",
           "parse_network", "render_network", "load_network", "bundled_network", "BUNDLED"]

BUNDLED = ("ex1", "ex2", "ex2b", "ex3", "laws-2x3")


class ParseError(ValueError):
    def __init__(self, line: int, message: str, token: str | None = None):
        self.line = line
        self.token = token
        where = f"line {line}" + (f", token {token!r}" if token is not None else "")
        super().__init__(f"{where}: {message}")


class DimensionMismatch(ParseError):
    pass


class NegativeEntryInA(ParseError):
    pass


@dataclass
class NetworkFile:
    net: NetworkData
    gammas: dict[int, np.ndarray] = field(default_factory=dict)
    family: str | None = None
    vectors: dict[str, tuple[Fraction, ...]] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.net.name


_HEADER = re.compile(r"^(network|materials|resources|activities|family)\s+(\S+)$")
_BLOCK = re.compile(r"^(lambda|R|A|gamma\s+(\d+)|vector\s+(\S+)):$")


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_network(text: str) -> NetworkFile:
    lines = [(i + 1, _strip(raw)) for i, raw in enumerate(text.splitlines())]
    lines = [(no, s) for no, s in lines if s]
    if not lines:
        raise ParseError(1, "empty network file")

    header: dict[str, str] = {}
    pos = 0

    def dims_needed(key):
        if key not in header:
            raise ParseError(lineno, f"'{key}' must be declared before this block")
        return int(header[key])

    blocks: dict[str, object] = {}
    gammas: dict[int, np.ndarray] = {}
    vectors: dict[str, tuple[Fraction, ...]] = {}

    def read_rows(count: int, width: int, start: int, conv, label: str):
        rows = []
        for k in range(count):
            if start + k >= len(lines):
                raise DimensionMismatch(lines[-1][0], f"{label}: expected {count} rows, file ended")
            no, s = lines[start + k]
            if _BLOCK.match(s) or _HEADER.match(s):
                raise DimensionMismatch(no, f"{label}: expected {count} rows, got {k}")
            toks = s.split()
            if len(toks) != width:
                raise DimensionMismatch(no, f"{label}: expected {width} entries, got {len(toks)}")
            row = []
            for tok in toks:
                try:
                    row.append(conv(tok))
                except ValueError:
                    raise ParseError(no, f"{label}: bad number", tok) from None
            rows.append(row)
        return rows

    while pos < len(lines):
        lineno, s = lines[pos]
        hm = _HEADER.match(s)
        bm = _BLOCK.match(s)
        if hm:
            key, val = hm.groups()
            if key in header:
                raise ParseError(lineno, f"duplicate '{key}'")
            if key in ("materials", "resources", "activities"):
                if not val.isdigit() or int(val) == 0:
                    raise ParseError(lineno, f"'{key}' needs a positive integer", val)
            if key == "family" and val not in ("deterministic", "gaussian", "bernoulli"):
                raise ParseError(lineno, "unknown family", val)
            header[key] = val
            pos += 1
            continue
        if not bm:
            raise ParseError(lineno, "unexpected line", s.split()[0])
        label = bm.group(1)
        if label == "lambda":
            m = dims_needed("materials")
            rows = read_rows(1, m, pos + 1, parse_rational, "lambda")
            blocks["lambda"] = tuple(rows[0])
            pos += 2
        elif label in ("R", "A"):
            nrow = dims_needed("materials" if label == "R" else "resources")
            ncol = dims_needed("activities")
            rows = read_rows(nrow, ncol, pos + 1, parse_rational, label)
            if label == "A":
                for k, row in enumerate(rows):
                    for v, tok in zip(row, lines[pos + 1 + k][1].split()):
                        if v < 0:
                            raise NegativeEntryInA(lines[pos + 1 + k][0],
                                                   "capacity consumption must be nonnegative", tok)
            if label in blocks:
                raise ParseError(lineno, f"duplicate block '{label}'")
            blocks[label] = rows
            pos += 1 + nrow
        elif bm.group(2) is not None:
            j = int(bm.group(2))
            m = dims_needed("materials")
            rows = read_rows(m, m, pos + 1, float, f"gamma {j}")
            gammas[j] = np.array(rows, dtype=float)
            pos += 1 + m
        else:
            vname = bm.group(3)
            m = dims_needed("materials")
            rows = read_rows(1, m, pos + 1, parse_rational, f"vector {vname}")
            vectors[vname] = tuple(rows[0])
            pos += 2

    for key in ("network", "materials", "resources", "activities"):
        if key not in header:
            raise ParseError(lines[-1][0], f"missing '{key}' declaration")
    for key in ("lambda", "R", "A"):
        if key not in blocks:
            raise ParseError(lines[-1][0], f"missing '{key}:' block")
    n = int(header["activities"])
    for j in gammas:
        if j > n:
            raise DimensionMismatch(lines[-1][0], f"gamma {j} refers to a nonexistent activity")
    try:
        net = NetworkData(Matrix(blocks["R"]), Matrix(blocks["A"]), blocks["lambda"],
                          header["network"])
    except ValueError as exc:
        raise ParseError(lines[-1][0], str(exc)) from None
    return NetworkFile(net, gammas, header.get("family"), vectors)


def _row(values) -> str:
    return " ".join(format_rational(v) for v in values)


def render_network(nf: NetworkFile | NetworkData) -> str:
    """Inverse of :func:`parse_network` (comments are not preserved)."""
    if isinstance(nf, NetworkData):
        nf = NetworkFile(nf)
    net = nf.net
    out = [f"network {net.name}", f"materials {net.m}", f"resources {net.r}",
           f"activities {net.n}", "lambda:", _row(net.lam), "R:"]
    out += [_row(r) for r in net.R.rows]
    out.append("A:")
    out += [_row(r) for r in net.A.rows]
    if nf.family:
        out.append(f"family {nf.family}")
    for j in sorted(nf.gammas):
        out.append(f"gamma {j}:")
        out += [" ".join(repr(float(v)) for v in row) for row in nf.gammas[j]]
    for name, vec in nf.vectors.items():
        out.append(f"vector {name}:")
        out.append(_row(vec))
    return "\n".join(out) + "\n"


def load_network(path: str | Path) -> NetworkFile:
    return parse_network(Path(path).read_text())


def bundled_network(name: str) -> NetworkFile:
    """One of the network files shipped with the package (see ``BUNDLED``)."""
    ref = resources.files("workbench") / "data" / f"{name}.net"
    return parse_network(ref.read_text())
