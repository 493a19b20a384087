"""Finite invertible Mealy machines as action backends.

States are the base elements.  Inverses come from :func:`inverse_machine`,
so generating sets such as ``{a, b}`` for the basilica group need not
list inverse states.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from selfsim import kernels
from selfsim.action import ActionBackend, Alphabet, SelfSimError

DATA_DIR = Path(__file__).parent / "data"


class MachineError(SelfSimError, ValueError):
    """Invalid machine definition or document."""


@dataclass(frozen=True)
class MealyMachine:
    """States sorted by name; ``out[s][x] = s.x`` and ``to[s][x]`` is the
    index of ``s|_x``."""

    alphabet: Alphabet
    states: tuple
    out: tuple
    to: tuple
    identity: int | None = None

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise MachineError(f"unknown state {name!r}") from None

    def __len__(self):
        return len(self.states)


@dataclass(frozen=True)
class Violation:
    state: str
    letter: str
    problem: str

    def __str__(self):
        return f"state {self.state!r}, letter {self.letter!r}: {self.problem}"


def validate(machine: MealyMachine) -> list:
    """Return the list of violations; an empty list means the machine is valid."""
    problems = []
    n = len(machine.states)
    letters = machine.alphabet.letters
    if len(set(machine.states)) != n:
        problems.append(Violation("", "", "duplicate state names"))
    for s, name in enumerate(machine.states):
        row = machine.out[s]
        if len(row) != len(letters) or len(machine.to[s]) != len(letters):
            problems.append(Violation(name, "", "row length differs from alphabet size"))
            continue
        seen = set()
        for x, y in enumerate(row):
            if not 0 <= y < len(letters):
                problems.append(Violation(name, letters[x], f"output index {y} out of range"))
            elif y in seen:
                problems.append(Violation(name, letters[x], f"output letter {letters[y]!r} repeated"))
            seen.add(y)
        for x, t in enumerate(machine.to[s]):
            if not 0 <= t < n:
                problems.append(Violation(name, letters[x], f"transition target {t} out of range"))
    if machine.identity is not None:
        e = machine.identity
        if not 0 <= e < n:
            problems.append(Violation("", "", "identity index out of range"))
        elif any(machine.out[e][x] != x or machine.to[e][x] != e for x in range(len(letters))):
            problems.append(Violation(machine.states[e], "", "identity state does not act trivially"))
    return problems


def _ensure_valid(machine):
    problems = validate(machine)
    if problems:
        raise MachineError("invalid machine: " + "; ".join(map(str, problems)))
    return machine


def make_machine(letters, rows: dict, identity: str | None = None) -> MealyMachine:
    """Build a machine from ``{state: {letter: (output, target)}}``.

    A missing identity state is synthesised as ``e`` (or ``e'``... if the
    name is taken).
    """
    alphabet = Alphabet(letters)
    rows = dict(rows)
    if identity is None:
        identity = "e"
        while identity in rows:
            identity += "'"
        rows[identity] = {x: (x, identity) for x in alphabet.letters}
    elif identity not in rows:
        rows[identity] = {x: (x, identity) for x in alphabet.letters}
    states = tuple(sorted(rows))
    index = {name: i for i, name in enumerate(states)}
    out, to = [], []
    for name in states:
        row = rows[name]
        o, t = [], []
        for x in alphabet.letters:
            if x not in row:
                raise MachineError(f"missing transition for state {name!r}, letter {x!r}")
            y, target = row[x]
            if target not in index:
                raise MachineError(f"state {name!r}, letter {x!r}: dangling target {target!r}")
            o.append(alphabet.index(y))
            t.append(index[target])
        out.append(tuple(o))
        to.append(tuple(t))
    return _ensure_valid(MealyMachine(alphabet, states, tuple(out), tuple(to), index[identity]))


def inverse_machine(machine: MealyMachine) -> MealyMachine:
    """Machine of formal inverses: state ``i`` stands for ``states[i]^-1``.

    Output rows are inverse permutations and ``g^-1|_y = (g|_{g^-1.y})^-1``.
    """
    out, to = [], []
    for s in range(len(machine.states)):
        row = machine.out[s]
        inv = [0] * len(row)
        for x, y in enumerate(row):
            inv[y] = x
        out.append(tuple(inv))
        to.append(tuple(machine.to[s][inv[y]] for y in range(len(row))))
    names = tuple(
        n if i == machine.identity else f"{n}^-1" for i, n in enumerate(machine.states)
    )
    return MealyMachine(machine.alphabet, names, tuple(out), tuple(to), machine.identity)


def minimize(machine: MealyMachine) -> tuple:
    """Merge states inducing the same tree automorphism.

    Returns ``(minimal machine, state map)`` where the map sends each
    original state name to its representative's name (the
    lexicographically first member of its class).
    """
    labels = kernels.refine_partition(machine.out, machine.to)
    classes: dict = {}
    for s, lab in enumerate(labels):
        classes.setdefault(lab, []).append(s)
    rep_of_label = {lab: min(members, key=lambda s: machine.states[s]) for lab, members in classes.items()}
    if machine.identity is not None:
        rep_of_label[labels[machine.identity]] = machine.identity
    reps = sorted(rep_of_label.values(), key=lambda s: machine.states[s])
    new_index = {s: i for i, s in enumerate(reps)}
    out = tuple(machine.out[s] for s in reps)
    to = tuple(tuple(new_index[rep_of_label[labels[t]]] for t in machine.to[s]) for s in reps)
    identity = None if machine.identity is None else new_index[machine.identity]
    minimal = MealyMachine(machine.alphabet, tuple(machine.states[s] for s in reps), out, to, identity)
    mapping = {machine.states[s]: machine.states[rep_of_label[labels[s]]] for s in range(len(machine.states))}
    return minimal, mapping


def isomorphic(m1: MealyMachine, m2: MealyMachine) -> bool:
    """Same alphabet and same named transition structure."""
    if m1.alphabet != m2.alphabet or m1.states != m2.states:
        return False
    return m1.out == m2.out and m1.to == m2.to


def builtin_odometer(n: int) -> MealyMachine:
    if n < 2:
        raise MachineError("odometer needs N >= 2")
    letters = [str(i) for i in range(n)]
    g = {letters[i]: (letters[i + 1], "e") for i in range(n - 1)}
    g[letters[-1]] = (letters[0], "g")
    return make_machine(letters, {"g": g}, identity="e")


def builtin_basilica() -> MealyMachine:
    return make_machine(
        ["x", "y"],
        {
            "a": {"x": ("y", "b"), "y": ("x", "e")},
            "b": {"x": ("x", "a"), "y": ("y", "e")},
        },
        identity="e",
    )


def builtin_grigorchuk() -> MealyMachine:
    return make_machine(
        ["x", "y"],
        {
            "a": {"x": ("y", "e"), "y": ("x", "e")},
            "b": {"x": ("x", "a"), "y": ("y", "c")},
            "c": {"x": ("x", "a"), "y": ("y", "d")},
            "d": {"x": ("x", "e"), "y": ("y", "b")},
        },
        identity="e",
    )


_DOC_KEYS = {"alphabet", "states", "identity"}
_STATE_KEYS = {"name", "out", "to"}


def load_machine(document) -> MealyMachine:
    """Validate a JSON machine document (dict, JSON text or path)."""
    if isinstance(document, (str, Path)) and not str(document).lstrip().startswith("{"):
        document = json.loads(Path(document).read_text(encoding="utf-8"))
    elif isinstance(document, str):
        document = json.loads(document)
    if not isinstance(document, dict):
        raise MachineError("machine document must be a JSON object")
    unknown = set(document) - _DOC_KEYS
    if unknown:
        raise MachineError(f"unknown keys {sorted(unknown)}")
    for key in ("alphabet", "states"):
        if key not in document:
            raise MachineError(f"missing key {key!r}")
    letters = document["alphabet"]
    if not isinstance(letters, list) or not all(isinstance(x, str) for x in letters):
        raise MachineError("'alphabet' must be a list of strings")
    rows: dict = {}
    for entry in document["states"]:
        if not isinstance(entry, dict):
            raise MachineError("each state must be an object")
        unknown = set(entry) - _STATE_KEYS
        if unknown:
            raise MachineError(f"unknown state keys {sorted(unknown)}")
        missing = _STATE_KEYS - set(entry)
        if missing:
            raise MachineError(f"state entry missing {sorted(missing)}")
        name = entry["name"]
        if not isinstance(name, str):
            raise MachineError("state names must be strings")
        if name in rows:
            raise MachineError(f"duplicate state name {name!r}")
        out, to = entry["out"], entry["to"]
        row = {}
        for x in letters:
            if x not in out:
                raise MachineError(f"state {name!r} has no output for letter {x!r}")
            if x not in to:
                raise MachineError(f"state {name!r} has no transition for letter {x!r}")
            if out[x] not in letters:
                raise MachineError(f"state {name!r}, letter {x!r}: unknown output {out[x]!r}")
            row[x] = (out[x], to[x])
        extra = (set(out) | set(to)) - set(letters)
        if extra:
            raise MachineError(f"state {name!r} mentions unknown letters {sorted(extra)}")
        rows[name] = row
    identity = document.get("identity")
    if identity is not None and not isinstance(identity, str):
        raise MachineError("'identity' must be a state name")
    return make_machine(letters, rows, identity=identity)


def dump_machine(machine: MealyMachine) -> dict:
    letters = machine.alphabet.letters
    states = []
    for s, name in enumerate(machine.states):
        states.append(
            {
                "name": name,
                "out": {letters[x]: letters[y] for x, y in enumerate(machine.out[s])},
                "to": {letters[x]: machine.states[t] for x, t in enumerate(machine.to[s])},
            }
        )
    doc = {"alphabet": list(letters), "states": states}
    if machine.identity is not None:
        doc["identity"] = machine.states[machine.identity]
    return doc


class MealyAction(ActionBackend):
    """Self-similar action generated by the states of a Mealy machine."""

    def __init__(self, machine: MealyMachine, name: str = ""):
        problems = validate(machine)
        if problems:
            raise MachineError("invalid machine: " + "; ".join(map(str, problems)))
        if machine.identity is None:
            raise MachineError("machine needs an identity state; build it with make_machine")
        super().__init__(machine.alphabet)
        self.machine = machine
        self.inverse = inverse_machine(machine)
        self.name = name

    def act1(self, base, inverted, x):
        m = self.inverse if inverted else self.machine
        return m.out[base][x]

    def res1(self, base, inverted, x):
        m = self.inverse if inverted else self.machine
        t = m.to[base][x]
        if t == self.machine.identity:
            return ()
        return ((t, inverted),)

    def normalize(self, factors):
        e = self.machine.identity
        return super().normalize(tuple(f for f in factors if f[0] != e))

    def base_name(self, base):
        return self.machine.states[base]

    def generators(self):
        return {
            name: self.base_element(i)
            for i, name in enumerate(self.machine.states)
            if i != self.machine.identity
        }

    def describe(self) -> dict:
        return {"type": "mealy", **dump_machine(self.machine)}


def odometer(n: int) -> MealyAction:
    return MealyAction(builtin_odometer(n), name=f"odometer({n})")


def basilica() -> MealyAction:
    return MealyAction(builtin_basilica(), name="basilica")


def grigorchuk() -> MealyAction:
    return MealyAction(builtin_grigorchuk(), name="grigorchuk")


def bundled_document(name: str) -> dict:
    """One of the machine documents shipped in ``selfsim/data``."""
    text = resources.files("selfsim").joinpath("data", f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)
