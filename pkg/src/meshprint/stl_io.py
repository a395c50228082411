"""ASCII and binary STL.

ASCII output follows the hand-written template exactly: ``solid <name>``, then
per facet ``  facet normal``, ``    outer loop``, three ``      vertex`` lines,
``    endloop``, ``  endfacet``, and finally ``endsolid <name>``.  Every number is
the shortest decimal that round-trips, always with a decimal point.
"""
from __future__ import annotations

import re
import warnings
from pathlib import Path

import numpy as np

from .errors import HeaderLooksAscii, MissingEndSolid, ParseError, TruncatedFile
from .mesh import TriangleMesh

FACET_INDENT = "  "
LOOP_INDENT = "    "
VERTEX_INDENT = "      "

_BINARY_DTYPE = np.dtype([
    ("normal", "<f4", (3,)),
    ("vertices", "<f4", (3, 3)),
    ("attr", "<u2"),
])
assert _BINARY_DTYPE.itemsize == 50

DEFAULT_HEADER = b"binary STL written by meshprint"


def format_number(v: float) -> str:
    s = repr(float(v))
    if s in ("nan", "inf", "-inf"):
        raise ValueError(f"cannot write non-finite coordinate {s}")
    mantissa, e, exp = s.partition("e")
    if "." not in mantissa:
        mantissa += ".0"
    return mantissa + e + exp


def write_ascii(m: TriangleMesh, name: str | None = None) -> bytes:
    if name is None:
        name = m.name
    out = [f"solid {name}"]
    fmt = format_number
    for n, tri in zip(m.normals.tolist(), m.vertices.tolist()):
        out.append(f"{FACET_INDENT}facet normal {fmt(n[0])} {fmt(n[1])} {fmt(n[2])}")
        out.append(f"{LOOP_INDENT}outer loop")
        for x, y, z in tri:
            out.append(f"{VERTEX_INDENT}vertex {fmt(x)} {fmt(y)} {fmt(z)}")
        out.append(f"{LOOP_INDENT}endloop")
        out.append(f"{FACET_INDENT}endfacet")
    out.append(f"endsolid {name}")
    return ("\n".join(out) + "\n").encode("ascii")


def _floats(tokens, count, lineno, what):
    if len(tokens) != count:
        raise ParseError(f"{what} needs {count} numbers, got {len(tokens)}", lineno)
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise ParseError(f"non-numeric field in {what}: {' '.join(tokens)!r}", lineno) from None


def read_ascii(data) -> TriangleMesh:
    """Parse ASCII STL.  Whitespace and blank lines are free-form; keywords are not."""
    if isinstance(data, (bytes, bytearray)):
        data = bytes(data).decode("ascii", errors="replace")
    lines = [(i, line.split()) for i, line in enumerate(data.splitlines(), 1)]
    lines = [(i, t) for i, t in lines if t]
    if not lines:
        raise ParseError("empty file", 1)
    it = iter(lines)
    lineno, tokens = next(it)
    if tokens[0].lower() != "solid":
        raise ParseError(f"expected 'solid', found {tokens[0]!r}", lineno)
    name = " ".join(tokens[1:])
    verts, norms = [], []
    last = lineno

    def expect(word):
        nonlocal last
        try:
            ln, toks = next(it)
        except StopIteration:
            raise MissingEndSolid(f"file ends before '{word}'", last + 1) from None
        last = ln
        head = " ".join(toks[:2]).lower() if word in ("outer loop", "facet normal") else toks[0].lower()
        if head != word:
            raise ParseError(f"expected {word!r}, found {' '.join(toks)!r}", ln)
        return ln, toks

    while True:
        try:
            ln, toks = next(it)
        except StopIteration:
            raise MissingEndSolid("missing 'endsolid'", last + 1) from None
        last = ln
        head = toks[0].lower()
        if head == "endsolid":
            break
        if head != "facet" or len(toks) < 2 or toks[1].lower() != "normal":
            raise ParseError(f"expected 'facet normal' or 'endsolid', found {' '.join(toks)!r}", ln)
        normal = _floats(toks[2:], 3, ln, "facet normal")
        expect("outer loop")
        tri = []
        for _ in range(3):
            ln, toks = expect("vertex")
            tri.append(_floats(toks[1:], 3, ln, "vertex"))
        ln, toks = next(it, (last + 1, None))
        if toks is None:
            raise MissingEndSolid("file ends inside a facet", ln)
        last = ln
        if toks[0].lower() != "endloop":
            what = "a fourth vertex" if toks[0].lower() == "vertex" else repr(" ".join(toks))
            raise ParseError(f"expected 'endloop', found {what}", ln)
        expect("endfacet")
        verts.append(tri)
        norms.append(normal)
    for ln, toks in it:
        raise ParseError(f"unexpected content after 'endsolid': {' '.join(toks)!r}", ln)
    if not verts:
        return TriangleMesh(np.empty((0, 3, 3)), np.empty((0, 3)), name)
    return TriangleMesh(np.array(verts, dtype=np.float64), np.array(norms, dtype=np.float64), name)


def write_binary(m: TriangleMesh, header: bytes = DEFAULT_HEADER) -> bytes:
    if len(m) >= 2 ** 32:
        raise ValueError("binary STL holds fewer than 2**32 facets")
    header = bytes(header)[:80].ljust(80, b" ")
    if header[:5].lower() == b"solid":
        warnings.warn("binary STL header starts with 'solid'", HeaderLooksAscii, stacklevel=2)
    rec = np.zeros(len(m), dtype=_BINARY_DTYPE)
    rec["normal"] = m.normals
    rec["vertices"] = m.vertices
    return header + np.uint32(len(m)).astype("<u4").tobytes() + rec.tobytes()


def read_binary(data: bytes, name: str = "") -> TriangleMesh:
    data = bytes(data)
    if len(data) < 84:
        raise TruncatedFile(f"{len(data)} bytes is shorter than the 84-byte binary STL preamble")
    count = int(np.frombuffer(data, dtype="<u4", count=1, offset=80)[0])
    expected = 84 + 50 * count
    if len(data) != expected:
        raise TruncatedFile(f"header promises {count} facets ({expected} bytes), file has {len(data)} bytes")
    if data[:5].lower() == b"solid":
        warnings.warn("binary STL header starts with 'solid'", HeaderLooksAscii, stacklevel=2)
    rec = np.frombuffer(data, dtype=_BINARY_DTYPE, count=count, offset=84)
    return TriangleMesh(rec["vertices"].astype(np.float64), rec["normal"].astype(np.float64), name)


def is_binary(data: bytes) -> bool:
    """Binary when the length matches the facet count; otherwise ASCII if it says ``solid``."""
    if len(data) >= 84:
        count = int(np.frombuffer(data, dtype="<u4", count=1, offset=80)[0])
        if len(data) == 84 + 50 * count:
            return True
    return not re.match(rb"\s*solid", data[:512])


def read_stl(path) -> TriangleMesh:
    data = Path(path).read_bytes()
    if is_binary(data):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", HeaderLooksAscii)
            return read_binary(data, name=Path(path).stem)
    return read_ascii(data)


def write_stl(m: TriangleMesh, path, binary=False, name=None):
    data = write_binary(m) if binary else write_ascii(m, name)
    Path(path).write_bytes(data)
    return len(data)
