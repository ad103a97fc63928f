"""JSON dump of a solved lattice program, for regression pinning and debugging.

Schema (``format = "qaprecoding.solve/1"``)::

    {
      "format": "qaprecoding.solve/1",
      "program": {"V": [[...]], "c": [...], "q": float, "delta": float, "levels": int},
      "instance": {"H_re": [[...]], "H_im": [[...]], "q": float, "N0": float, "gamma": float}
                  | null,
      "beta": {"re": float, "im": float} | null,
      "solution": {"x": [int] | null, "a": [float] | null, "objective": float | null,
                   "lower_bound": float | null, "status": str, "nodes_explored": int,
                   "relaxation_solves": int, "wall_time": float},
      "incumbent_trace": [[node, objective], ...],
      "node_trace": [{"node": int, "depth": int, "bound": float, "incumbent": float}, ...]
    }

Non-finite floats are written as ``null``.  Floats round-trip exactly
because ``json`` emits the shortest repr.
"""

from __future__ import annotations

import json
import math

import numpy as np

from ..model import SystemInstance
from .bnb import SolveResult, Status
from .program import RealQuadraticProgram

__all__ = ["DUMP_FORMAT", "dump_solution", "dumps_solution", "load_solution", "loads_solution"]

DUMP_FORMAT = "qaprecoding.solve/1"


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _unnum(x):
    return math.inf if x is None else float(x)


def dump_solution(prog: RealQuadraticProgram, result: SolveResult,
                  inst: SystemInstance | None = None, beta=None) -> dict:
    """Plain-dict form of a solve, ready for ``json.dump``."""
    doc = {
        "format": DUMP_FORMAT,
        "program": {"V": prog.V.tolist(), "c": prog.c.tolist(), "q": float(prog.q),
                    "delta": float(prog.delta), "levels": int(prog.levels)},
        "instance": None,
        "beta": None,
        "solution": {
            "x": None if result.x is None else [int(v) for v in result.x],
            "a": None if result.a is None else [float(v) for v in result.a],
            "objective": _num(result.objective),
            "lower_bound": _num(result.lower_bound),
            "status": Status(result.status).value,
            "nodes_explored": int(result.nodes_explored),
            "relaxation_solves": int(result.relaxation_solves),
            "wall_time": float(result.wall_time),
        },
        "incumbent_trace": [[int(n), _num(v)] for n, v in result.incumbent_trace],
        "node_trace": [{k: (int(v) if k in ("node", "depth") else _num(v)) for k, v in e.items()}
                       for e in result.node_trace],
    }
    if inst is not None:
        doc["instance"] = {"H_re": inst.H.real.tolist(), "H_im": inst.H.imag.tolist(),
                           "q": float(inst.q), "N0": float(inst.N0), "gamma": float(inst.gamma)}
    if beta is not None:
        b = complex(beta)
        doc["beta"] = {"re": b.real, "im": b.imag}
    return doc


def dumps_solution(prog, result, inst=None, beta=None) -> str:
    return json.dumps(dump_solution(prog, result, inst, beta), indent=1) + "\n"


def load_solution(doc: dict):
    """Inverse of :func:`dump_solution`.

    Returns ``(prog, result, inst, beta)``; ``inst`` and ``beta`` are None
    when absent from the document.
    """
    if doc.get("format") != DUMP_FORMAT:
        raise ValueError(f"unsupported dump format {doc.get('format')!r}")
    p = doc["program"]
    prog = RealQuadraticProgram(np.array(p["V"], dtype=float), np.array(p["c"], dtype=float),
                                float(p["q"]), float(p["delta"]), int(p["levels"]))
    s = doc["solution"]
    x = None if s["x"] is None else np.array(s["x"], dtype=np.int64)
    a = None if s["a"] is None else np.array(s["a"], dtype=float)
    result = SolveResult(
        x, a, _unnum(s["objective"]), Status(s["status"]), _unnum(s["lower_bound"]),
        int(s["nodes_explored"]), int(s["relaxation_solves"]), float(s["wall_time"]),
        [(int(n), _unnum(v)) for n, v in doc.get("incumbent_trace", [])],
        [dict(e) for e in doc.get("node_trace", [])],
    )
    inst = None
    if doc.get("instance") is not None:
        i = doc["instance"]
        H = np.array(i["H_re"], dtype=float) + 1j * np.array(i["H_im"], dtype=float)
        inst = SystemInstance(H, i["q"], i["N0"], i["gamma"])
    beta = None
    if doc.get("beta") is not None:
        beta = complex(doc["beta"]["re"], doc["beta"]["im"])
    return prog, result, inst, beta


def loads_solution(text: str):
    return load_solution(json.loads(text))
