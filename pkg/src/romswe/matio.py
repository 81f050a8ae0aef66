"""Portable matrix container: text header + raw little-endian payload.

One file holds any number of named float64 matrices plus string metadata.
The header is plain ASCII, one declaration per line, terminated by ``end``;
the binary payloads follow in declaration order, column-major, little-endian.

    ROMSWE-MATRIX 1
    meta <key> <value>
    field <name> float64 <rows> <cols>
    ...
    end
    <raw bytes>

The format is bit-exact across platforms and trivially parseable from any
language.  Files are written atomically (temp file + rename).
"""

import os
import tempfile

import numpy as np

MAGIC = "ROMSWE-MATRIX 1"


class MatrixFileError(IOError):
    """Base class for matrix-file failures."""


class CorruptHeaderError(MatrixFileError):
    """The header is missing, malformed, or carries an unknown magic line."""


class DimensionError(MatrixFileError):
    """A declared field has invalid dimensions."""


class TruncatedPayloadError(MatrixFileError):
    """The binary payload ends before all declared fields are read."""


def save_matrices(path, fields: dict, meta: dict = None) -> None:
    """Write named float64 arrays and metadata atomically to ``path``."""
    lines = [MAGIC]
    for key, value in (meta or {}).items():
        text = str(value)
        if "\n" in text or " " in str(key):
            raise ValueError(f"metadata entry {key!r} must be single-token key "
                             "with single-line value")
        lines.append(f"meta {key} {text}")
    arrays = {}
    for name, arr in fields.items():
        a = np.ascontiguousarray(np.atleast_2d(np.asarray(arr, dtype=np.float64)))
        if a.ndim != 2:
            raise DimensionError(f"field {name!r} is not a matrix")
        arrays[name] = a
        lines.append(f"field {name} float64 {a.shape[0]} {a.shape[1]}")
    lines.append("end\n")
    header = "\n".join(lines).encode("ascii")

    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            for a in arrays.values():
                fh.write(np.asfortranarray(a).astype("<f8").tobytes(order="F"))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_matrices(path):
    """Read a matrix container; returns (fields, meta) with float64 arrays."""
    with open(path, "rb") as fh:
        data = fh.read()

    nl = data.find(b"\n")
    if nl < 0 or data[:nl].decode("ascii", "replace") != MAGIC:
        raise CorruptHeaderError(f"{path}: not a matrix container (bad magic)")

    decls = []
    meta = {}
    pos = nl + 1
    while True:
        nl = data.find(b"\n", pos)
        if nl < 0:
            raise CorruptHeaderError(f"{path}: header not terminated by 'end'")
        line = data[pos:nl].decode("ascii", "replace")
        pos = nl + 1
        if line == "end":
            break
        parts = line.split(" ")
        if parts[0] == "meta" and len(parts) >= 3:
            meta[parts[1]] = " ".join(parts[2:])
        elif parts[0] == "field" and len(parts) == 5 and parts[2] == "float64":
            try:
                rows, cols = int(parts[3]), int(parts[4])
            except ValueError as exc:
                raise CorruptHeaderError(f"{path}: bad field line {line!r}") from exc
            if rows < 0 or cols < 0:
                raise DimensionError(f"{path}: negative dimensions in {line!r}")
            decls.append((parts[1], rows, cols))
        else:
            raise CorruptHeaderError(f"{path}: unrecognized header line {line!r}")

    fields = {}
    for name, rows, cols in decls:
        nbytes = rows * cols * 8
        chunk = data[pos:pos + nbytes]
        if len(chunk) < nbytes:
            raise TruncatedPayloadError(
                f"{path}: field {name!r} needs {nbytes} bytes, "
                f"only {len(chunk)} remain")
        fields[name] = np.frombuffer(chunk, dtype="<f8").reshape(
            (rows, cols), order="F").copy()
        pos += nbytes
    return fields, meta
