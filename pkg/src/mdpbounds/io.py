"""JSON file formats for MDPs, policies and reports.

Floats are written with ``repr`` (shortest round-tripping decimal), so
serialize -> parse -> serialize is byte-identical.

MDP file::

    {"n_states": 2, "n_actions": 1,
     "transition": [[[0.7, 0.3]], [[0.2, 0.8]]],   # [x][a][y]
     "reward": [[1.0], [0.0]],                     # [x][a]
     "initial_dist": [1.0, 0.0]}

Policy file::

    {"probs": [[1.0], [1.0]]}                      # [x][a]
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ValidationError
from .mdp import Mdp, Policy

_NUM = {"type": "number"}
MDP_SCHEMA = {
    "type": "object",
    "required": ["n_states", "n_actions", "transition", "reward", "initial_dist"],
    "properties": {
        "n_states": {"type": "integer", "minimum": 1},
        "n_actions": {"type": "integer", "minimum": 1},
        "transition": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "array", "items": _NUM}},
        },
        "reward": {"type": "array", "items": {"type": "array", "items": _NUM}},
        "initial_dist": {"type": "array", "items": _NUM},
    },
}
POLICY_SCHEMA = {
    "type": "object",
    "required": ["probs"],
    "properties": {"probs": {"type": "array", "items": {"type": "array", "items": _NUM}}},
}


def to_jsonable(obj):
    """Recursively convert numpy containers/scalars into plain JSON types."""
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if not math.isfinite(f):
            raise ValueError(f"cannot serialize non-finite float {f!r}")
        return f
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2) + "\n"


def _parse(text: str, source: str, schema: dict) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(exc.msg, f"{source}:{exc.lineno}:{exc.colno}") from exc
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        path = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in exc.absolute_path)
        raise ValidationError(exc.message, f"{source}:{path or '$'}") from exc
    return data


def mdp_to_dict(mdp: Mdp) -> dict:
    return {
        "n_states": mdp.n_states,
        "n_actions": mdp.n_actions,
        "transition": mdp.transition,
        "reward": mdp.reward,
        "initial_dist": mdp.initial_dist,
    }


def mdp_from_dict(data: dict, source: str = "<mdp>") -> Mdp:
    n, m = data["n_states"], data["n_actions"]
    try:
        t = np.array(data["transition"], dtype=float)
        r = np.array(data["reward"], dtype=float)
        mu = np.array(data["initial_dist"], dtype=float)
    except ValueError as exc:
        raise ValidationError(f"ragged array ({exc})", source) from exc
    if t.shape != (n, m, n):
        raise ValidationError(f"transition has shape {t.shape}, expected {(n, m, n)}", source)
    try:
        return Mdp(t, r, mu)
    except ValidationError as exc:
        raise ValidationError(str(exc), source) from exc


def policy_to_dict(policy: Policy) -> dict:
    return {"probs": policy.probs}


def policy_from_dict(data: dict, source: str = "<policy>") -> Policy:
    try:
        return Policy(np.array(data["probs"], dtype=float))
    except ValueError as exc:
        raise ValidationError(str(exc), source) from exc


def dumps_mdp(mdp: Mdp) -> str:
    return dumps(mdp_to_dict(mdp))


def loads_mdp(text: str, source: str = "<mdp>") -> Mdp:
    return mdp_from_dict(_parse(text, source, MDP_SCHEMA), source)


def dumps_policy(policy: Policy) -> str:
    return dumps(policy_to_dict(policy))


def loads_policy(text: str, source: str = "<policy>") -> Policy:
    return policy_from_dict(_parse(text, source, POLICY_SCHEMA), source)


def load_mdp(path) -> Mdp:
    path = Path(path)
    return loads_mdp(path.read_text(), str(path))


def load_policy(path) -> Policy:
    path = Path(path)
    return loads_policy(path.read_text(), str(path))


def save_mdp(mdp: Mdp, path) -> None:
    Path(path).write_text(dumps_mdp(mdp))


def save_policy(policy: Policy, path) -> None:
    Path(path).write_text(dumps_policy(policy))
