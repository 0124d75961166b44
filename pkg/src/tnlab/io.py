"""File formats: TNT v1 tensors and the containers built from them.

A TNT v1 document is structured text (JSON) with four fields::

    {"format": "TNT v1",
     "dims":   [2, 3],
     "labels": ["left", "phys"],
     "re":     [...],   # flat, row-major
     "im":     [...]}

Doubles are written with their shortest decimal representation, so a
save/load round trip is bit-exact.  MPS and MPO files wrap a list of TNT
tensors with a small header; channels are stored as a single rank-3 TNT
tensor with labels (kraus, row, col); symmetry representations are a map
from generator names to complex matrices.
"""

from __future__ import annotations

import json

import numpy as np

from .tensor import Tensor

TNT_FORMAT = "TNT v1"
MPS_FORMAT = "MPS v1"
MPO_FORMAT = "MPO v1"
REPS_FORMAT = "REPS v1"

CHANNEL_LABELS = ("kraus", "row", "col")


class FileFormatError(ValueError):
    """Malformed document; ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"field {field!r}: {message}"
        super().__init__(message)


def _require(doc, field, kind):
    if not isinstance(doc, dict):
        raise FileFormatError("document is not a JSON object", field="<root>")
    if field not in doc:
        raise FileFormatError("missing", field=field)
    value = doc[field]
    if not isinstance(value, kind):
        raise FileFormatError(
            f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}",
            field=field,
        )
    return value


def _check_format(doc, expected):
    fmt = _require(doc, "format", str)
    if fmt != expected:
        raise FileFormatError(f"expected {expected!r}, got {fmt!r}", field="format")


def tensor_to_doc(t):
    data = np.ascontiguousarray(t.data)
    return {
        "format": TNT_FORMAT,
        "dims": [int(d) for d in t.dims],
        "labels": list(t.labels),
        "re": [float(x) for x in data.real.ravel()],
        "im": [float(x) for x in data.imag.ravel()],
    }


def tensor_from_doc(doc):
    _check_format(doc, TNT_FORMAT)
    dims = _require(doc, "dims", list)
    labels = _require(doc, "labels", list)
    re = _require(doc, "re", list)
    im = _require(doc, "im", list)
    for k, d in enumerate(dims):
        if not isinstance(d, int) or d < 0:
            raise FileFormatError(f"entry {k} is not a nonnegative int", field="dims")
    if len(labels) != len(dims):
        raise FileFormatError(
            f"{len(labels)} labels for {len(dims)} dims", field="labels"
        )
    size = 1
    for d in dims:
        size *= d
    if len(re) != size:
        raise FileFormatError(f"expected {size} entries, got {len(re)}", field="re")
    if len(im) != size:
        raise FileFormatError(f"expected {size} entries, got {len(im)}", field="im")
    try:
        arr = np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"non-numeric entry ({exc})", field="re") from None
    if not np.all(np.isfinite(arr)):
        raise FileFormatError("entries must be finite", field="re")
    try:
        return Tensor(arr.reshape(dims), labels)
    except ValueError as exc:
        raise FileFormatError(str(exc), field="labels") from None


def _dump(doc, path):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, allow_nan=False)
        fh.write("\n")


def _load(path):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"not valid JSON: {exc}", field="<root>") from None


def save_tensor(t, path):
    _dump(tensor_to_doc(t), path)


def load_tensor(path):
    return tensor_from_doc(_load(path))


def save_mps(m, path):
    doc = {
        "format": MPS_FORMAT,
        "boundary": m.boundary,
        "phys_dim": m.phys_dim,
        "n_sites": m.n_sites,
        "tensors": [tensor_to_doc(t) for t in m.tensors],
    }
    _dump(doc, path)


def load_mps(path):
    from .mps import Mps

    doc = _load(path)
    _check_format(doc, MPS_FORMAT)
    boundary = _require(doc, "boundary", str)
    n = _require(doc, "n_sites", int)
    d = _require(doc, "phys_dim", int)
    tensors = _require(doc, "tensors", list)
    if len(tensors) != n:
        raise FileFormatError(f"expected {n} tensors, got {len(tensors)}", field="tensors")
    sites = [tensor_from_doc(t) for t in tensors]
    try:
        m = Mps(sites, boundary=boundary)
    except ValueError as exc:
        raise FileFormatError(str(exc), field="tensors") from None
    if m.phys_dim != d:
        raise FileFormatError(
            f"header says {d}, tensors have {m.phys_dim}", field="phys_dim"
        )
    return m


def save_mpo(m, path):
    doc = {
        "format": MPO_FORMAT,
        "boundary": m.boundary,
        "phys_dim": m.phys_dim,
        "n_sites": m.n_sites,
        "tensors": [tensor_to_doc(t) for t in m.tensors],
    }
    _dump(doc, path)


def load_mpo(path):
    from .mps import Mpo

    doc = _load(path)
    _check_format(doc, MPO_FORMAT)
    boundary = _require(doc, "boundary", str)
    tensors = _require(doc, "tensors", list)
    sites = [tensor_from_doc(t) for t in tensors]
    try:
        return Mpo(sites, boundary=boundary)
    except ValueError as exc:
        raise FileFormatError(str(exc), field="tensors") from None


def save_channel(channel, path):
    t = Tensor(channel.kraus, CHANNEL_LABELS)
    _dump(tensor_to_doc(t), path)


def load_channel(path):
    from .channels import QuantumChannel

    t = load_tensor(path)
    if tuple(t.labels) != CHANNEL_LABELS:
        raise FileFormatError(
            f"expected labels {CHANNEL_LABELS}, got {t.labels}", field="labels"
        )
    try:
        return QuantumChannel(t.data)
    except ValueError as exc:
        raise FileFormatError(str(exc), field="re") from None


def matrix_to_doc(m):
    m = np.asarray(m, dtype=complex)
    return {
        "re": [[float(x) for x in row] for row in m.real],
        "im": [[float(x) for x in row] for row in m.imag],
    }


def matrix_from_doc(doc, field="matrix"):
    re = _require(doc, "re", list)
    im = _require(doc, "im", list)
    try:
        arr = np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"ragged or non-numeric matrix ({exc})", field=field) from None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise FileFormatError(f"expected a square matrix, got shape {arr.shape}", field=field)
    return arr


def save_reps(unitaries, path, group=None):
    doc = {"format": REPS_FORMAT}
    if group is not None:
        doc["group"] = group
    doc["unitaries"] = {name: matrix_to_doc(u) for name, u in unitaries.items()}
    _dump(doc, path)


def load_reps(path):
    """Return ``(group_name_or_None, {generator: matrix})``."""
    doc = _load(path)
    _check_format(doc, REPS_FORMAT)
    raw = _require(doc, "unitaries", dict)
    unitaries = {}
    for name, entry in raw.items():
        if not isinstance(entry, dict):
            raise FileFormatError("expected an object with re/im", field=f"unitaries.{name}")
        unitaries[str(name)] = matrix_from_doc(entry, field=f"unitaries.{name}")
    group = doc.get("group")
    return group, unitaries
