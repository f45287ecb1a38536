"""JSON state files.

Schema (version 1)::

    {
      "schema_version": 1,
      "objects": {
        "rho":  {"kind": "density", "dim": 2,
                 "entries": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]},
        "q":    {"kind": "diagonal", "diag": [0.25, 0.75]},
        "chan": {"kind": "channel", "states": ["rho", "q"]},
        "src":  {"kind": "cq", "probs": [0.5, 0.5], "states": ["rho", "q"]}
      }
    }

Complex entries are ``[re, im]`` pairs (a bare number means a real entry).
Channel and cq ``states`` may name other objects or inline density objects.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channelcode import CQChannel
from .errors import ValidationError
from .states import CQState, validate_density

SCHEMA_VERSION = 1


class InputError(ValidationError):
    """Malformed or invalid state file; message carries the file location."""


@dataclass
class StateFile:
    path: str
    text: str
    objects: dict

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()

    def _line_of(self, name: str) -> int | None:
        m = re.search(r'"' + re.escape(name) + r'"\s*:', self.text)
        return self.text.count("\n", 0, m.start()) + 1 if m else None

    def _fail(self, name: str, msg: str):
        line = self._line_of(name)
        where = f"{self.path}:{line}" if line else self.path
        raise InputError(f"{where}: object {name!r}: {msg}")

    def _raw(self, name: str) -> dict:
        if name not in self.objects:
            raise InputError(f"{self.path}: no object named {name!r} (have {sorted(self.objects)})")
        return self.objects[name]

    def _parse_matrix(self, name: str, obj: dict) -> np.ndarray:
        kind = obj.get("kind")
        if kind == "diagonal":
            diag = obj.get("diag")
            if not isinstance(diag, list) or not diag:
                self._fail(name, "'diag' must be a non-empty list")
            return np.diag(np.array([_number(self, name, v) for v in diag], dtype=complex))
        if kind != "density":
            self._fail(name, f"expected kind 'density' or 'diagonal', got {kind!r}")
        dim = obj.get("dim")
        rows = obj.get("entries")
        if not isinstance(dim, int) or dim < 1:
            self._fail(name, "'dim' must be a positive integer")
        if not isinstance(rows, list) or len(rows) != dim or any(
            not isinstance(r, list) or len(r) != dim for r in rows
        ):
            self._fail(name, f"'entries' must be a {dim}x{dim} array")
        return np.array([[_number(self, name, v) for v in r] for r in rows], dtype=complex)

    def density(self, name: str) -> np.ndarray:
        obj = self._raw(name)
        mat = self._parse_matrix(name, obj)
        try:
            return validate_density(mat, name)
        except ValidationError as exc:
            self._fail(name, str(exc))

    def _state_list(self, name: str, items) -> list[np.ndarray]:
        if not isinstance(items, list) or not items:
            self._fail(name, "'states' must be a non-empty list")
        out = []
        for i, item in enumerate(items):
            if isinstance(item, str):
                out.append(self.density(item))
            elif isinstance(item, dict):
                mat = self._parse_matrix(name, item)
                try:
                    out.append(validate_density(mat, f"{name}.states[{i}]"))
                except ValidationError as exc:
                    self._fail(name, str(exc))
            else:
                self._fail(name, f"states[{i}] must be a name or an inline density")
        return out

    def channel(self, name: str) -> CQChannel:
        obj = self._raw(name)
        if obj.get("kind") not in ("channel", "cq"):
            self._fail(name, f"expected kind 'channel', got {obj.get('kind')!r}")
        try:
            return CQChannel(tuple(self._state_list(name, obj.get("states"))))
        except ValidationError as exc:
            self._fail(name, str(exc))

    def cq_state(self, name: str) -> CQState:
        obj = self._raw(name)
        if obj.get("kind") != "cq":
            self._fail(name, f"expected kind 'cq', got {obj.get('kind')!r}")
        probs = obj.get("probs")
        if not isinstance(probs, list):
            self._fail(name, "'probs' must be a list")
        try:
            return CQState(np.array(probs, dtype=float), tuple(self._state_list(name, obj.get("states"))))
        except (ValidationError, TypeError, ValueError) as exc:
            self._fail(name, str(exc))

    def kind(self, name: str) -> str:
        return self._raw(name).get("kind", "")


def _number(sf: StateFile, name: str, v) -> complex:
    if isinstance(v, bool):
        sf._fail(name, f"invalid matrix entry {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(
        isinstance(t, (int, float)) and not isinstance(t, bool) for t in v
    ):
        return complex(v[0], v[1])
    sf._fail(name, f"invalid matrix entry {v!r}; expected a number or [re, im]")


def loads(text: str, path: str = "<string>") -> StateFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None
    if not isinstance(data, dict) or not isinstance(data.get("objects"), dict):
        raise InputError(f"{path}: top level must be an object with an 'objects' mapping")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise InputError(f"{path}: unsupported schema_version {version!r}")
    return StateFile(path, text, data["objects"])


def load(path: str | Path) -> StateFile:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read: {exc.strerror}") from None
    return loads(text, str(path))


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "kind": "density",
        "dim": int(m.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }
