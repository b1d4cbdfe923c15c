"""Plain-text exchange format for simplicial complexes.

One facet per non-comment line, as whitespace-separated 1-based vertex
indices; lines starting with '#' are ignored.  The first non-comment line
may be ``n <N>`` to fix the vertex count, otherwise n is the largest index
seen.  Writing emits maximal faces only, sorted lexicographically, so
read(write(K)) == K as set families.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import TextIO

from .complexes import SimplicialComplex


class ComplexParseError(ValueError):
    """Malformed complex file; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def read_complex(stream: TextIO) -> SimplicialComplex:
    facets: list[tuple[int, ...]] = []
    n_header: int | None = None
    first_data_line = True
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if first_data_line and tokens[0] == "n":
            if len(tokens) != 2:
                raise ComplexParseError("header must be 'n <N>'", lineno)
            try:
                n_header = int(tokens[1])
            except ValueError:
                raise ComplexParseError(f"bad vertex count {tokens[1]!r}", lineno) from None
            if n_header < 1:
                raise ComplexParseError(f"vertex count must be positive, got {n_header}", lineno)
            first_data_line = False
            continue
        first_data_line = False
        try:
            verts = tuple(int(t) for t in tokens)
        except ValueError:
            bad = next(t for t in tokens if not t.lstrip("-").isdigit())
            raise ComplexParseError(f"bad vertex index {bad!r}", lineno) from None
        if any(v < 1 for v in verts):
            raise ComplexParseError("vertex indices are 1-based positive integers", lineno)
        if n_header is not None and max(verts) > n_header:
            raise ComplexParseError(f"vertex index exceeds declared n={n_header}", lineno)
        facets.append(verts)
    n = n_header if n_header is not None else max((max(f) for f in facets), default=1)
    return SimplicialComplex.from_facets(n, facets) if facets else SimplicialComplex(n)


def write_complex(K: SimplicialComplex, stream: TextIO) -> None:
    stream.write(f"n {K.n}\n")
    for facet in K.maximal_faces():
        stream.write(" ".join(str(v) for v in facet) + "\n")


def load_complex(path: str | Path) -> SimplicialComplex:
    with open(path, "r", encoding="utf-8") as f:
        return read_complex(f)


def dump_complex(K: SimplicialComplex, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        write_complex(K, f)


def loads_complex(text: str) -> SimplicialComplex:
    return read_complex(io.StringIO(text))


def dumps_complex(K: SimplicialComplex) -> str:
    buf = io.StringIO()
    write_complex(K, buf)
    return buf.getvalue()
