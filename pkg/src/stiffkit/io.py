"""JSON model documents: load into an :class:`~stiffkit.parallel.Assembly`
and serialize back.

A document holds one or more chains, each with an optional base pose and a
platform offset ``v`` (reference point -> chain end point). ``v`` defaults to
the value implied by the geometry; when given it must agree with it.
"""
from __future__ import annotations

import json
import logging
import math
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .chain import ActuatedJoint, ChainModel, PassiveJoint, RigidLink, VirtualSpring6, forward_kinematics
from .errors import InputError, ModelValidationError
from .linalg import RigidTransform, unit
from .parallel import Assembly, LegAttachment

log = logging.getLogger(__name__)

AXIS_WARN_TOL = 1e-6


def schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("model.schema.json").read_text())


def _finite(doc: Any, where: str = "$") -> None:
    if isinstance(doc, float) and not math.isfinite(doc):
        raise ModelValidationError(f"non-finite number at {where}")
    if isinstance(doc, dict):
        for k, v in doc.items():
            _finite(v, f"{where}.{k}")
    elif isinstance(doc, list):
        for i, v in enumerate(doc):
            _finite(v, f"{where}[{i}]")


def _pose(d: dict | None) -> RigidTransform:
    d = d or {}
    try:
        return RigidTransform.from_rpy(d.get("rotation_rpy", [0.0, 0.0, 0.0]),
                                       d.get("translation", [0.0, 0.0, 0.0]))
    except ValueError as exc:
        raise ModelValidationError(str(exc)) from None


def _axis(raw, where: str) -> np.ndarray:
    a = np.asarray(raw, dtype=float)
    n = float(np.linalg.norm(a))
    if n == 0.0:
        raise ModelValidationError(f"{where}: zero axis")
    if abs(n - 1.0) > AXIS_WARN_TOL:
        log.warning("%s: axis %s renormalized (norm %.9g)", where, list(raw), n)
    return unit(a)


def _element(e: dict, where: str):
    t = e["type"]
    name = e.get("name")
    if t == "rigid_link":
        return RigidLink(_pose(e), name=name)
    if t == "spring6":
        K = np.asarray(e["K"], dtype=float)
        if np.linalg.norm(K - K.T) > 1e-12 * np.linalg.norm(K):
            raise ModelValidationError(f"{where}: spring matrix K is not symmetric")
        if np.linalg.eigvalsh(0.5 * (K + K.T)).min() <= 0:
            raise ModelValidationError(f"{where}: spring matrix K is not positive-definite")
        return VirtualSpring6(K, name=name)
    if t == "actuated":
        return ActuatedJoint(_axis(e["axis"], where), e["kind"], e["stiffness"], name=name)
    return PassiveJoint(_axis(e["axis"], where), e["kind"], name=name)


def model_from_dict(doc: dict) -> Assembly:
    """Validate a parsed document and build the assembly.

    Raises
    ------
    ModelValidationError
        On schema violations, non-finite numbers, asymmetric or indefinite
        spring matrices, or a platform offset inconsistent with the geometry.
    """
    try:
        jsonschema.validate(doc, schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise ModelValidationError(f"schema violation at /{path}: {exc.message}") from None
    _finite(doc)
    chains = []
    for ci, c in enumerate(doc["chains"]):
        elements = tuple(_element(e, f"chains[{ci}].elements[{ei}]") for ei, e in enumerate(c["elements"]))
        chain = ChainModel(c["name"], elements, _pose(c.get("base_pose")))
        if chain.n_theta < 1:
            raise ModelValidationError(f"chain {chain.name!r} has no springs")
        chains.append((chain, c.get("v")))
    names = [c.name for c, _ in chains]
    if len(set(names)) != len(names):
        raise ModelValidationError("chain names must be unique")

    if "reference_point" in doc:
        ref = np.asarray(doc["reference_point"], dtype=float)
    else:
        ref = forward_kinematics(chains[0][0]).translation
    legs = []
    for chain, v in chains:
        if v is None:
            v = forward_kinematics(chain).translation - ref
        legs.append(LegAttachment(chain, v))
    asm = Assembly(tuple(legs), RigidTransform.from_translation(ref), name=doc["name"])
    asm.validate_offsets()
    return asm


def load_model(path) -> Assembly:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read model file: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from None
    return model_from_dict(doc)


def _vec(a) -> list:
    return [float(x) for x in a]


def _element_dict(e) -> dict:
    if isinstance(e, RigidLink):
        d = {"type": "rigid_link", "translation": _vec(e.transform.translation),
             "rotation_rpy": _vec(e.transform.rpy())}
    elif isinstance(e, VirtualSpring6):
        d = {"type": "spring6", "K": [_vec(row) for row in e.K]}
    elif isinstance(e, ActuatedJoint):
        d = {"type": "actuated", "kind": e.kind, "axis": _vec(e.axis), "stiffness": e.stiffness}
    else:
        d = {"type": "passive", "kind": e.kind, "axis": _vec(e.axis)}
    if e.name:
        d["name"] = e.name
    return d


def model_to_dict(asm: Assembly) -> dict:
    return {
        "name": asm.name,
        "reference_point": _vec(asm.reference_point),
        "chains": [
            {
                "name": leg.chain.name,
                "base_pose": {"translation": _vec(leg.chain.base_pose.translation),
                              "rotation_rpy": _vec(leg.chain.base_pose.rpy())},
                "v": _vec(leg.v),
                "elements": [_element_dict(e) for e in leg.chain.elements],
            }
            for leg in asm.legs
        ],
    }


def save_model(asm: Assembly, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(asm), indent=2) + "\n")
