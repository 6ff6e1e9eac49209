"""JSON documents for ring elements, matrices, systems and signals.

Shapes::

    truncation   {"num_vars": m, "max_degree": d}
    element      {"terms": [{"alpha": [a_1, ..., a_m], "re": r, "im": i}, ...]}
    matrix       {"rows": r, "cols": c, "entries": [[element, ...], ...]}
    system       {"truncation": ..., "dims": {"state": N, "input": q, "output": p},
                  "A": matrix, "B": matrix, "C": matrix, "D": matrix}
    signal       {"truncation": ..., "signal": [vector, ...]}

A signal vector is either a column matrix or a plain list of elements.
Terms are written in graded-lex order so output is byte-stable.
"""

from __future__ import annotations

import io
import json
from typing import Any, Sequence

import numpy as np

from wicksys.errors import DimensionMismatch
from wicksys.multiindex import MultiIndex, TruncationSpec, index_table
from wicksys.ring import RingElement
from wicksys.ringmatrix import RingMatrix
from wicksys.statespace import StateSpaceSystem, TransferSeries


class SchemaError(ValueError):
    """A JSON document does not match the expected shape."""


def _require(doc: dict, key: str, kind: str):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"{kind} document is missing '{key}'")
    return doc[key]


def truncation_to_dict(spec: TruncationSpec) -> dict:
    return {"num_vars": spec.num_vars, "max_degree": spec.max_degree}


def truncation_from_dict(doc: dict) -> TruncationSpec:
    m = _require(doc, "num_vars", "truncation")
    d = _require(doc, "max_degree", "truncation")
    if not isinstance(m, int) or not isinstance(d, int) or isinstance(m, bool) or isinstance(d, bool):
        raise SchemaError("num_vars and max_degree must be integers")
    return TruncationSpec(m, d)


def element_to_dict(f: RingElement) -> dict:
    m = f.spec.num_vars
    terms = [
        {"alpha": alpha.to_dense(m), "re": c.real, "im": c.imag}
        for alpha, c in f.coeffs.items()
    ]
    return {"terms": terms}


def element_from_dict(doc: Any, spec: TruncationSpec) -> RingElement:
    if isinstance(doc, (int, float)) and not isinstance(doc, bool):
        return RingElement.constant(spec, doc)
    terms = _require(doc, "terms", "element")
    table = index_table(spec)
    vec = np.zeros(table.size, dtype=np.complex128)
    for term in terms:
        alpha = _require(term, "alpha", "term")
        if not isinstance(alpha, list) or len(alpha) != spec.num_vars:
            raise SchemaError(f"alpha must be a list of {spec.num_vars} exponents, got {alpha!r}")
        if any(not isinstance(a, int) or isinstance(a, bool) or a < 0 for a in alpha):
            raise SchemaError(f"alpha entries must be non-negative integers, got {alpha!r}")
        index = MultiIndex.from_dense(alpha)
        if index.degree > spec.max_degree:
            raise SchemaError(f"alpha {alpha} exceeds max_degree {spec.max_degree}")
        re, im = term.get("re", 0.0), term.get("im", 0.0)
        vec[table.lookup(index)] += complex(float(re), float(im))
    return RingElement.from_vector(spec, vec)


def matrix_to_dict(m: RingMatrix) -> dict:
    return {
        "rows": m.rows,
        "cols": m.cols,
        "entries": [[element_to_dict(e) for e in row] for row in m.entries()],
    }


def matrix_from_dict(doc: Any, spec: TruncationSpec) -> RingMatrix:
    entries = _require(doc, "entries", "matrix")
    if not isinstance(entries, list) or not entries or not all(isinstance(r, list) for r in entries):
        raise SchemaError("entries must be a non-empty list of rows")
    rows = [[element_from_dict(e, spec) for e in row] for row in entries]
    try:
        out = RingMatrix.from_entries(rows)
    except DimensionMismatch as exc:
        raise SchemaError(str(exc)) from None
    if out.shape != (doc.get("rows", out.rows), doc.get("cols", out.cols)):
        raise SchemaError(f"declared shape {(doc.get('rows'), doc.get('cols'))} != entries {out.shape}")
    return out


def system_to_dict(sys: StateSpaceSystem) -> dict:
    n, q, p = sys.dims
    return {
        "truncation": truncation_to_dict(sys.spec),
        "dims": {"state": n, "input": q, "output": p},
        "A": matrix_to_dict(sys.A),
        "B": matrix_to_dict(sys.B),
        "C": matrix_to_dict(sys.C),
        "D": matrix_to_dict(sys.D),
    }


def system_from_dict(doc: dict) -> StateSpaceSystem:
    spec = truncation_from_dict(_require(doc, "truncation", "system"))
    mats = {k: matrix_from_dict(_require(doc, k, "system"), spec) for k in "ABCD"}
    try:
        sys = StateSpaceSystem(**mats)
    except DimensionMismatch as exc:
        raise SchemaError(str(exc)) from None
    dims = doc.get("dims")
    if dims is not None:
        declared = (dims.get("state"), dims.get("input"), dims.get("output"))
        if declared != sys.dims:
            raise SchemaError(f"declared dims {declared} disagree with matrices {sys.dims}")
    return sys


def vector_from_doc(doc: Any, spec: TruncationSpec) -> RingMatrix:
    if isinstance(doc, list):
        return RingMatrix.from_entries([[element_from_dict(e, spec)] for e in doc])
    m = matrix_from_dict(doc, spec)
    if m.cols != 1:
        raise SchemaError(f"signal vectors must be columns, got shape {m.shape}")
    return m


def signal_to_dict(signal: Sequence[RingMatrix], spec: TruncationSpec) -> dict:
    return {"truncation": truncation_to_dict(spec), "signal": [matrix_to_dict(v) for v in signal]}


def signal_from_dict(doc: dict, spec: TruncationSpec | None = None) -> list[RingMatrix]:
    if "truncation" in doc:
        declared = truncation_from_dict(doc["truncation"])
        if spec is not None and declared != spec:
            raise SchemaError(f"signal truncation {declared} differs from system truncation {spec}")
        spec = declared
    if spec is None:
        raise SchemaError("signal document needs a truncation")
    vectors = _require(doc, "signal", "signal")
    if not isinstance(vectors, list):
        raise SchemaError("signal must be a list of vectors")
    return [vector_from_doc(v, spec) for v in vectors]


def element_doc_to_dict(f: RingElement) -> dict:
    return {"truncation": truncation_to_dict(f.spec), **element_to_dict(f)}


def element_doc_from_dict(doc: dict) -> RingElement:
    spec = truncation_from_dict(_require(doc, "truncation", "element"))
    return element_from_dict(doc, spec)


def series_to_dict(series: TransferSeries) -> dict:
    spec = series[0].spec
    return {"truncation": truncation_to_dict(spec), "markov": [matrix_to_dict(h) for h in series]}


def complex_matrix_to_csv(m: np.ndarray) -> str:
    """Rows of ``row,col,re,im`` for a complex matrix."""
    m = np.atleast_2d(m)
    buf = io.StringIO()
    buf.write("row,col,re,im\n")
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            buf.write(f"{i},{j},{float(m[i, j].real)!r},{float(m[i, j].imag)!r}\n")
    return buf.getvalue()


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, allow_nan=False)
