"""Instance and solution files: canonical JSON with ``[re, im]`` entries."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .ensemble import StateEnsemble, build_ensemble
from .solver import Measurement, Solution, verify_optimality


class InstanceError(ValueError):
    pass


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x}")
    return format(x, ".17g")


def _is_leaf(obj) -> bool:
    return not isinstance(obj, dict) and not (
        isinstance(obj, (list, tuple)) and any(not _is_leaf(v) for v in obj)
    )


def _dump(obj, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for n, k in enumerate(keys):
            out.append(f"{pad}  {json.dumps(str(k))}: ")
            _dump(obj[k], indent + 1, out)
            out.append(",\n" if n + 1 < len(keys) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if _is_leaf(obj):
            out.append("[" + ", ".join(_scalar_or_leaf(v) for v in obj) + "]")
            return
        out.append("[\n")
        for n, v in enumerate(obj):
            out.append(pad + "  ")
            _dump(v, indent + 1, out)
            out.append(",\n" if n + 1 < len(obj) else "\n")
        out.append(pad + "]")
    else:
        out.append(_scalar_or_leaf(obj))


def _scalar_or_leaf(v) -> str:
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_scalar_or_leaf(x) for x in v) + "]"
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v))
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def canonical_dumps(obj: Any) -> str:
    """Sorted keys, floats with 17 significant digits, numeric arrays inline."""
    out: list[str] = []
    _dump(obj, 0, out)
    return "".join(out) + "\n"


def encode_matrix(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def decode_matrix(data, path: str, dim: int | None = None) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise InstanceError(f"{path}: expected a non-empty list of rows")
    rows = len(data)
    if dim is not None and rows != dim:
        raise InstanceError(f"{path}: expected {dim} rows, got {rows}")
    cols = None
    out = []
    for r, row in enumerate(data):
        if not isinstance(row, list):
            raise InstanceError(f"{path}[{r}]: expected a list of [re, im] pairs")
        if cols is None:
            cols = len(row)
        if len(row) != cols or (dim is not None and len(row) != dim):
            want = dim if dim is not None else cols
            raise InstanceError(f"{path}[{r}]: ragged row (expected {want} entries, got {len(row)})")
        vals = []
        for c, z in enumerate(row):
            if (
                not isinstance(z, list)
                or len(z) != 2
                or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in z)
            ):
                raise InstanceError(f"{path}[{r}][{c}]: expected [re, im] pair of numbers")
            vals.append(complex(z[0], z[1]))
        out.append(vals)
    return np.array(out, dtype=complex)


def _number(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InstanceError(f"{path}: expected a number")
    return float(v)


@dataclass
class Symmetry:
    kind: str
    unitaries: list[np.ndarray]
    generators: list[np.ndarray] = field(default_factory=list)


@dataclass
class Instance:
    dimension: int
    priors: list[float]
    matrices: list[np.ndarray]
    symmetry: Symmetry | None = None

    def ensemble(self) -> StateEnsemble:
        return build_ensemble(self.matrices, self.priors)

    def to_dict(self) -> dict:
        d: dict[str, Any] = {
            "dimension": self.dimension,
            "states": [{"prior": p, "matrix": encode_matrix(m)} for p, m in zip(self.priors, self.matrices)],
        }
        if self.symmetry is not None:
            sym = {"kind": self.symmetry.kind, "unitaries": [encode_matrix(u) for u in self.symmetry.unitaries]}
            if self.symmetry.kind == "cgu":
                sym["generators"] = [encode_matrix(g) for g in self.symmetry.generators]
            d["symmetry"] = sym
        return d

    def symmetric(self):
        """The GU/CGU view of this instance, or ``None`` without a symmetry block."""
        from . import symmetry as sy

        if self.symmetry is None:
            return None
        group = sy.validate_group(self.symmetry.unitaries)
        e = self.ensemble()
        if self.symmetry.kind == "gu":
            return sy.gu_from_ensemble(e, group)
        return sy.cgu_from_ensemble(e, group, self.symmetry.generators)


def instance_from_dict(d) -> Instance:
    if not isinstance(d, dict):
        raise InstanceError("top level: expected an object")
    if "dimension" not in d:
        raise InstanceError("dimension: missing")
    n = d["dimension"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InstanceError("dimension: expected a positive integer")
    states = d.get("states")
    if not isinstance(states, list) or not states:
        raise InstanceError("states: expected a non-empty list")
    priors, mats = [], []
    for i, s in enumerate(states):
        if not isinstance(s, dict):
            raise InstanceError(f"states[{i}]: expected an object")
        if "prior" not in s:
            raise InstanceError(f"states[{i}].prior: missing")
        if "matrix" not in s:
            raise InstanceError(f"states[{i}].matrix: missing")
        priors.append(_number(s["prior"], f"states[{i}].prior"))
        mats.append(decode_matrix(s["matrix"], f"states[{i}].matrix", n))
    symmetry = None
    if "symmetry" in d:
        sd = d["symmetry"]
        if not isinstance(sd, dict):
            raise InstanceError("symmetry: expected an object")
        kind = sd.get("kind")
        if kind not in ("gu", "cgu"):
            raise InstanceError('symmetry.kind: expected "gu" or "cgu"')
        us = sd.get("unitaries")
        if not isinstance(us, list) or not us:
            raise InstanceError("symmetry.unitaries: expected a non-empty list")
        unitaries = [decode_matrix(u, f"symmetry.unitaries[{k}]", n) for k, u in enumerate(us)]
        generators = []
        if kind == "cgu":
            gs = sd.get("generators")
            if not isinstance(gs, list) or not gs:
                raise InstanceError("symmetry.generators: expected a non-empty list for cgu")
            generators = [decode_matrix(g, f"symmetry.generators[{k}]", n) for k, g in enumerate(gs)]
        symmetry = Symmetry(kind, unitaries, generators)
    return Instance(n, priors, mats, symmetry)


def _load_json(path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_instance(path) -> Instance:
    return instance_from_dict(_load_json(path))


def dump_instance(inst: Instance) -> str:
    return canonical_dumps(inst.to_dict())


def solution_report(e: StateEnsemble, sol: Solution, tol: float = 1e-6) -> dict:
    m = sol.measurement
    report = verify_optimality(e, m, sol.certificate.Z, tol)
    d = {
        "method": sol.method,
        "status": sol.status,
        "p_detect": m.p_detect,
        "p_inconclusive": m.p_inconclusive,
        "etas": list(m.etas),
        "operators": [encode_matrix(op) for op in m.operators],
        "dual": {"Z": encode_matrix(sol.certificate.Z), "trace": sol.certificate.trace},
        "residuals": dict(report.residuals, duality_gap=sol.gap),
        "certificate": "PASS" if report.passed else "FAIL",
        "iterations": sol.iterations,
        "notes": list(sol.notes),
    }
    if sol.generators:
        d["generators"] = [encode_matrix(g) for g in sol.generators]
    return d


@dataclass
class LoadedSolution:
    measurement: Measurement
    Z: np.ndarray
    method: str


def solution_from_dict(d, e: StateEnsemble) -> LoadedSolution:
    if not isinstance(d, dict):
        raise InstanceError("solution: expected an object")
    ops = d.get("operators")
    if not isinstance(ops, list):
        raise InstanceError("operators: expected a list")
    if len(ops) != e.m + 1:
        raise InstanceError(f"operators: expected {e.m + 1} operators for {e.m} states, got {len(ops)}")
    mats = [decode_matrix(op, f"operators[{k}]", e.dim) for k, op in enumerate(ops)]
    dual = d.get("dual")
    if not isinstance(dual, dict) or "Z" not in dual:
        raise InstanceError("dual.Z: missing")
    z = decode_matrix(dual["Z"], "dual.Z", e.dim)
    measurement = Measurement.assemble(e, mats[1:], mats[0])
    return LoadedSolution(measurement, z, str(d.get("method", "")))


def load_solution(path, e: StateEnsemble) -> LoadedSolution:
    return solution_from_dict(_load_json(path), e)
