"""JSON machine files.

Every file is an object with ``format`` (``"qcfa-machine"``), ``version``
(``1``), ``kind`` and the kind's payload fields; unknown fields are
rejected.  Complex numbers are ``[re, im]`` pairs, vectors are lists of
pairs and matrices are row-major lists of rows.  1QCFA files store each
distinct unitary and measurement once (``operators`` / ``measurements``)
and refer to them by id from ``transitions``.  See ``docs/machine-format.md``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .linalg import MeasurementFamily
from .models import Alphabet, Dfa, Mm1qfa, Mo1qfa, Pfa, Qcfa, Qfacl

FORMAT = "qcfa-machine"
VERSION = 1


class MachineFileError(ValueError):
    """The file is not a well-formed machine description."""


# ---------------------------------------------------------------------------
# encoding


def _num(x: float):
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def encode_vector(v) -> list:
    return [[_num(z.real), _num(z.imag)] for z in np.asarray(v, dtype=np.complex128)]


def encode_matrix(a) -> list:
    return [encode_vector(row) for row in np.asarray(a, dtype=np.complex128)]


def _encode_dfa(d: Dfa) -> dict:
    return {
        "alphabet": list(d.alphabet),
        "states": list(d.states),
        "initial": d.initial,
        "accepting": [s for s in d.states if s in d.accepting],
        "transitions": {s: {a: d.transitions[(s, a)] for a in d.alphabet if (s, a) in d.transitions}
                        for s in d.states},
    }


def _encode_pfa(p: Pfa) -> dict:
    return {
        "alphabet": list(p.alphabet),
        "states": list(p.states),
        "accepting": [s for s in p.states if s in p.accepting],
        "strict": p.strict,
        "transitions": {
            s: {sym: {t: str(w) for t, w in p.transitions[(s, sym)].items()}
                for sym in p.alphabet.tape if (s, sym) in p.transitions}
            for s in p.states
        },
    }


def _encode_unitaries(m) -> dict:
    return {sym: encode_matrix(m.unitaries[sym]) for sym in m.alphabet.tape if sym in m.unitaries}


def _encode_measurement(meas: MeasurementFamily) -> dict:
    return {label: encode_matrix(p) for label, p in meas}


def _encode_mo(m: Mo1qfa) -> dict:
    return {
        "alphabet": list(m.alphabet),
        "dim": m.dim,
        "unitaries": _encode_unitaries(m),
        "initial": encode_vector(m.initial),
        "accepting": encode_matrix(m.accepting),
    }


def _encode_mm(m: Mm1qfa) -> dict:
    out = _encode_mo(m)
    out["rejecting"] = encode_matrix(m.rejecting)
    return out


def _encode_qfacl(q: Qfacl) -> dict:
    return {
        "alphabet": list(q.alphabet),
        "dim": q.dim,
        "unitaries": _encode_unitaries(q),
        "initial": encode_vector(q.initial),
        "observable": _encode_measurement(q.observable),
        "control": _encode_dfa(q.control),
    }


def _encode_qcfa(a: Qcfa) -> dict:
    operators: dict[str, list] = {}
    op_ids: dict[bytes, str] = {}
    measurements: dict[str, dict] = {}
    meas_ids: dict[tuple, str] = {}
    transitions: dict[str, dict] = {}
    for s in a.states:
        row = {}
        for sym in a.alphabet.tape:
            key = (s, sym)
            if key not in a.unitaries:
                continue
            u = np.ascontiguousarray(a.unitaries[key])
            uk = u.tobytes()
            if uk not in op_ids:
                op_ids[uk] = f"U{len(op_ids)}"
                operators[op_ids[uk]] = encode_matrix(u)
            meas = a.measurements[key]
            mk = tuple((label, np.ascontiguousarray(p).tobytes()) for label, p in meas)
            if mk not in meas_ids:
                meas_ids[mk] = f"M{len(meas_ids)}"
                measurements[meas_ids[mk]] = _encode_measurement(meas)
            row[sym] = {"unitary": op_ids[uk], "measurement": meas_ids[mk], "next": dict(a.transitions[key])}
        transitions[s] = row
    return {
        "alphabet": list(a.alphabet),
        "dim": a.dim,
        "states": list(a.states),
        "initial_state": a.initial_state,
        "initial_vector": encode_vector(a.initial_vector),
        "accepting": list(a.accepting),
        "rejecting": list(a.rejecting),
        "operators": operators,
        "measurements": measurements,
        "transitions": transitions,
    }


_ENCODERS = {"dfa": _encode_dfa, "pfa": _encode_pfa, "mo1qfa": _encode_mo, "mm1qfa": _encode_mm,
             "qfacl": _encode_qfacl, "qcfa": _encode_qcfa}


def to_dict(machine) -> dict:
    kind = machine.kind
    return {"format": FORMAT, "version": VERSION, "kind": kind, **_ENCODERS[kind](machine)}


def dumps(machine) -> str:
    return json.dumps(to_dict(machine), indent=1, ensure_ascii=False) + "\n"


def save(machine, path) -> None:
    Path(path).write_text(dumps(machine), encoding="utf-8")


# ---------------------------------------------------------------------------
# decoding


def _fields(obj, required: set[str], where: str, optional: set[str] = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise MachineFileError(f"{where}: expected an object")
    keys = set(obj)
    unknown = keys - required - optional
    if unknown:
        raise MachineFileError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = required - keys
    if missing:
        raise MachineFileError(f"{where}: missing field(s) {sorted(missing)}")
    return obj


def _str(x, where: str) -> str:
    if not isinstance(x, str):
        raise MachineFileError(f"{where}: expected a string")
    return x


def _str_list(x, where: str) -> list[str]:
    if not isinstance(x, list):
        raise MachineFileError(f"{where}: expected a list")
    return [_str(v, where) for v in x]


def _real(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise MachineFileError(f"{where}: malformed number {x!r}")
    return float(x)


def decode_complex(x, where: str) -> complex:
    if not isinstance(x, list) or len(x) != 2:
        raise MachineFileError(f"{where}: complex numbers are [re, im] pairs, got {x!r}")
    return complex(_real(x[0], where), _real(x[1], where))


def decode_vector(x, where: str) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise MachineFileError(f"{where}: expected a non-empty list of [re, im] pairs")
    return np.array([decode_complex(z, where) for z in x], dtype=np.complex128)


def decode_matrix(x, where: str) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise MachineFileError(f"{where}: expected a non-empty list of rows")
    rows = [decode_vector(r, where) for r in x]
    if len({len(r) for r in rows}) != 1:
        raise MachineFileError(f"{where}: ragged matrix")
    return np.array(rows, dtype=np.complex128)


def _dim(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < 1:
        raise MachineFileError(f"{where}: dimension must be a positive integer")
    return x


def _alphabet(x, where: str) -> Alphabet:
    try:
        return Alphabet(_str_list(x, where))
    except ValueError as exc:
        raise MachineFileError(f"{where}: {exc}") from exc


_DFA_FIELDS = {"alphabet", "states", "initial", "accepting", "transitions"}


def _decode_dfa(obj, where: str = "dfa") -> Dfa:
    _fields(obj, _DFA_FIELDS, where)
    table = obj["transitions"]
    if not isinstance(table, dict):
        raise MachineFileError(f"{where}.transitions: expected an object")
    delta = {}
    for s, row in table.items():
        if not isinstance(row, dict):
            raise MachineFileError(f"{where}.transitions.{s}: expected an object")
        for a, t in row.items():
            delta[(s, a)] = _str(t, f"{where}.transitions.{s}.{a}")
    return Dfa(_str_list(obj["states"], f"{where}.states"), _alphabet(obj["alphabet"], f"{where}.alphabet"),
               delta, _str(obj["initial"], f"{where}.initial"), _str_list(obj["accepting"], f"{where}.accepting"))


def _weight(x, where: str) -> Fraction:
    try:
        if isinstance(x, str):
            return Fraction(x)
        return Fraction(_real(x, where)).limit_denominator(10**12)
    except (ValueError, ZeroDivisionError) as exc:
        raise MachineFileError(f"{where}: malformed weight {x!r}") from exc


def _decode_pfa(obj) -> Pfa:
    _fields(obj, {"alphabet", "states", "accepting", "strict", "transitions"}, "pfa")
    if not isinstance(obj["strict"], bool):
        raise MachineFileError("pfa.strict: expected true or false")
    rows = {}
    if not isinstance(obj["transitions"], dict):
        raise MachineFileError("pfa.transitions: expected an object")
    for s, by_sym in obj["transitions"].items():
        if not isinstance(by_sym, dict):
            raise MachineFileError(f"pfa.transitions.{s}: expected an object")
        for sym, row in by_sym.items():
            if not isinstance(row, dict):
                raise MachineFileError(f"pfa.transitions.{s}.{sym}: expected an object")
            rows[(s, sym)] = {t: _weight(w, f"pfa.transitions.{s}.{sym}.{t}") for t, w in row.items()}
    return Pfa(_str_list(obj["states"], "pfa.states"), _alphabet(obj["alphabet"], "pfa.alphabet"), rows,
               _str_list(obj["accepting"], "pfa.accepting"), strict=obj["strict"])


def _decode_unitaries(x, where: str) -> dict:
    if not isinstance(x, dict):
        raise MachineFileError(f"{where}: expected an object")
    return {sym: decode_matrix(m, f"{where}.{sym}") for sym, m in x.items()}


def _decode_measurement(x, where: str) -> MeasurementFamily:
    if not isinstance(x, dict) or not x:
        raise MachineFileError(f"{where}: expected a non-empty label -> matrix object")
    return MeasurementFamily([(label, decode_matrix(m, f"{where}.{label}")) for label, m in x.items()])


def _decode_mo(obj) -> Mo1qfa:
    _fields(obj, {"alphabet", "dim", "unitaries", "initial", "accepting"}, "mo1qfa")
    return Mo1qfa(dim=_dim(obj["dim"], "mo1qfa.dim"), alphabet=_alphabet(obj["alphabet"], "mo1qfa.alphabet"),
                  unitaries=_decode_unitaries(obj["unitaries"], "mo1qfa.unitaries"),
                  initial=decode_vector(obj["initial"], "mo1qfa.initial"),
                  accepting=decode_matrix(obj["accepting"], "mo1qfa.accepting"))


def _decode_mm(obj) -> Mm1qfa:
    _fields(obj, {"alphabet", "dim", "unitaries", "initial", "accepting", "rejecting"}, "mm1qfa")
    return Mm1qfa(dim=_dim(obj["dim"], "mm1qfa.dim"), alphabet=_alphabet(obj["alphabet"], "mm1qfa.alphabet"),
                  unitaries=_decode_unitaries(obj["unitaries"], "mm1qfa.unitaries"),
                  initial=decode_vector(obj["initial"], "mm1qfa.initial"),
                  accepting=decode_matrix(obj["accepting"], "mm1qfa.accepting"),
                  rejecting=decode_matrix(obj["rejecting"], "mm1qfa.rejecting"))


def _decode_qfacl(obj) -> Qfacl:
    _fields(obj, {"alphabet", "dim", "unitaries", "initial", "observable", "control"}, "qfacl")
    return Qfacl(dim=_dim(obj["dim"], "qfacl.dim"), alphabet=_alphabet(obj["alphabet"], "qfacl.alphabet"),
                 unitaries=_decode_unitaries(obj["unitaries"], "qfacl.unitaries"),
                 initial=decode_vector(obj["initial"], "qfacl.initial"),
                 observable=_decode_measurement(obj["observable"], "qfacl.observable"),
                 control=_decode_dfa(obj["control"], "qfacl.control"))


def _decode_qcfa(obj) -> Qcfa:
    _fields(obj, {"alphabet", "dim", "states", "initial_state", "initial_vector", "accepting", "rejecting",
                  "operators", "measurements", "transitions"}, "qcfa")
    if not isinstance(obj["operators"], dict) or not isinstance(obj["measurements"], dict):
        raise MachineFileError("qcfa: operators and measurements must be objects")
    ops = {k: decode_matrix(v, f"qcfa.operators.{k}") for k, v in obj["operators"].items()}
    meas = {k: _decode_measurement(v, f"qcfa.measurements.{k}") for k, v in obj["measurements"].items()}
    unitaries, measurements, transitions = {}, {}, {}
    if not isinstance(obj["transitions"], dict):
        raise MachineFileError("qcfa.transitions: expected an object")
    for s, by_sym in obj["transitions"].items():
        if not isinstance(by_sym, dict):
            raise MachineFileError(f"qcfa.transitions.{s}: expected an object")
        for sym, entry in by_sym.items():
            where = f"qcfa.transitions.{s}.{sym}"
            _fields(entry, {"unitary", "measurement", "next"}, where)
            u_id, m_id = _str(entry["unitary"], where), _str(entry["measurement"], where)
            if u_id not in ops:
                raise MachineFileError(f"{where}: unknown operator {u_id!r}")
            if m_id not in meas:
                raise MachineFileError(f"{where}: unknown measurement {m_id!r}")
            if not isinstance(entry["next"], dict):
                raise MachineFileError(f"{where}.next: expected an object")
            unitaries[(s, sym)] = ops[u_id]
            measurements[(s, sym)] = meas[m_id]
            transitions[(s, sym)] = {label: _str(t, f"{where}.next.{label}") for label, t in entry["next"].items()}
    return Qcfa(
        dim=_dim(obj["dim"], "qcfa.dim"),
        states=_str_list(obj["states"], "qcfa.states"),
        alphabet=_alphabet(obj["alphabet"], "qcfa.alphabet"),
        unitaries=unitaries,
        measurements=measurements,
        transitions=transitions,
        initial_vector=decode_vector(obj["initial_vector"], "qcfa.initial_vector"),
        initial_state=_str(obj["initial_state"], "qcfa.initial_state"),
        accepting=_str_list(obj["accepting"], "qcfa.accepting"),
        rejecting=_str_list(obj["rejecting"], "qcfa.rejecting"),
    )


_DECODERS = {"dfa": _decode_dfa, "pfa": _decode_pfa, "mo1qfa": _decode_mo, "mm1qfa": _decode_mm,
             "qfacl": _decode_qfacl, "qcfa": _decode_qcfa}


def from_dict(obj):
    if not isinstance(obj, dict):
        raise MachineFileError("machine file must contain a JSON object")
    if obj.get("format") != FORMAT:
        raise MachineFileError(f"format must be {FORMAT!r}")
    if obj.get("version") != VERSION:
        raise MachineFileError(f"unsupported version {obj.get('version')!r}")
    kind = obj.get("kind")
    if kind not in _DECODERS:
        raise MachineFileError(f"unknown kind {kind!r}")
    payload = {k: v for k, v in obj.items() if k not in ("format", "version", "kind")}
    return _DECODERS[kind](payload)


def loads(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MachineFileError(f"invalid JSON: {exc}") from exc
    return from_dict(obj)


def load(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MachineFileError(f"cannot read {path}: {exc}") from exc
    return loads(text)
