"""Append-only log of compilation actions, with replay and rollback support.

Every class or method (re)definition appends one ChangeRecord. Rollback never
rewrites history: it appends the inverse actions as new records, so the log
keeps growing and any point of it can be reproduced by replaying a prefix.
"""

import hashlib
import json
import time

KINDS = ("defineClass", "redefineClass", "removeClass",
         "defineMethod", "redefineMethod", "removeMethod")
ORIGINS = ("user", "debugger", "deprecationRewrite", "tryMaterialization", "rollback")


class JournalError(Exception):
    pass


class ChangeRecord:
    __slots__ = ("seq", "timestamp", "kind", "class_name", "selector",
                 "before_source", "after_source", "origin")

    def __init__(self, seq, kind, class_name, selector, before_source,
                 after_source, origin, timestamp=None):
        self.seq = seq
        self.timestamp = time.time() if timestamp is None else timestamp
        self.kind = kind
        self.class_name = class_name
        self.selector = selector
        self.before_source = before_source
        self.after_source = after_source
        self.origin = origin

    def to_dict(self):
        return {
            "seq": self.seq,
            "kind": self.kind,
            "className": self.class_name,
            "selector": self.selector,
            "beforeSource": self.before_source,
            "afterSource": self.after_source,
            "origin": self.origin,
        }

    def export_line(self):
        """Flat key=value form, one record per line; strings JSON-escaped."""
        fields = [
            ("seq", str(self.seq)),
            ("kind", self.kind),
            ("class", self.class_name),
            ("selector", self.selector or ""),
            ("origin", self.origin),
            ("before", json.dumps(self.before_source) if self.before_source is not None else ""),
            ("after", json.dumps(self.after_source) if self.after_source is not None else ""),
        ]
        return " ".join(f"{key}={value}" for key, value in fields)


class Journal:
    def __init__(self):
        self.records = []

    @property
    def latest_seq(self):
        return len(self.records)

    def append(self, kind, class_name, selector, before_source, after_source, origin):
        if kind not in KINDS:
            raise JournalError(f"unknown change kind {kind!r}")
        if origin not in ORIGINS:
            raise JournalError(f"unknown origin {origin!r}")
        record = ChangeRecord(len(self.records) + 1, kind, class_name, selector,
                              before_source, after_source, origin)
        self.records.append(record)
        return record

    def slice(self, from_seq, to_seq):
        """Inclusive ascending slice; out-of-order bounds give an empty list."""
        if from_seq < 0 or to_seq < 0:
            raise JournalError("sequence numbers are non-negative")
        return [r for r in self.records if from_seq <= r.seq <= to_seq]

    def export_lines(self):
        return [r.export_line() for r in self.records]


# -- replay model ----------------------------------------------------------
#
# A code state is the pure data view of the world's code: for each touched
# class, its superclass, its declared fields and its method sources. Folding
# records over an empty state must land on the same digest as reading the
# live world, which is what makes rollback verifiable.


def empty_state():
    return {}


def apply_record(state, record):
    kind = record.kind
    name = record.class_name
    if kind in ("defineClass", "redefineClass"):
        if kind == "defineClass" and name in state:
            raise JournalError(f"replay: class {name} already defined (seq {record.seq})")
        if kind == "redefineClass" and name not in state:
            raise JournalError(f"replay: class {name} not defined (seq {record.seq})")
        super_name, fields = _parse_shell(record.after_source)
        entry = state.setdefault(name, {"super": None, "fields": [], "methods": {}})
        entry["super"] = super_name
        entry["fields"] = fields
    elif kind == "removeClass":
        if name not in state:
            raise JournalError(f"replay: class {name} not defined (seq {record.seq})")
        del state[name]
    elif kind in ("defineMethod", "redefineMethod"):
        # Methods may land on classes the journal never defines (built-ins);
        # such entries exist only while they carry methods.
        entry = state.setdefault(
            name, {"super": "Object", "fields": [], "methods": {}, "synthetic": True})
        if kind == "defineMethod" and record.selector in entry["methods"]:
            raise JournalError(
                f"replay: method {name}>>{record.selector} already defined (seq {record.seq})")
        if kind == "redefineMethod" and record.selector not in entry["methods"]:
            raise JournalError(
                f"replay: method {name}>>{record.selector} not defined (seq {record.seq})")
        entry["methods"][record.selector] = record.after_source
    elif kind == "removeMethod":
        entry = state.get(name)
        if entry is None or record.selector not in entry["methods"]:
            raise JournalError(
                f"replay: method {name}>>{record.selector} not defined (seq {record.seq})")
        del entry["methods"][record.selector]
        if not entry["methods"] and entry.get("synthetic"):
            del state[name]
    return state


def replay_state(records):
    state = empty_state()
    for record in records:
        apply_record(state, record)
    return state


def digest_of_state(state):
    """Deterministic hash of a code state (sorted keys, canonical JSON)."""
    canonical = {}
    for name in sorted(state):
        entry = state[name]
        canonical[name] = {
            "super": entry["super"],
            "fields": list(entry["fields"]),
            "methods": {sel: entry["methods"][sel] for sel in sorted(entry["methods"])},
        }
    blob = json.dumps(canonical, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def replay_digest(records):
    """Digest of the code state reached by folding records over nothing."""
    return digest_of_state(replay_state(records))


def invert(record):
    """The single record-shaped action that undoes the given record."""
    kind = record.kind
    if kind == "defineClass":
        return ("removeClass", record.class_name, None, record.after_source, None)
    if kind == "redefineClass":
        return ("redefineClass", record.class_name, None,
                record.after_source, record.before_source)
    if kind == "removeClass":
        return ("defineClass", record.class_name, None, None, record.before_source)
    if kind == "defineMethod":
        return ("removeMethod", record.class_name, record.selector,
                record.after_source, None)
    if kind == "redefineMethod":
        return ("redefineMethod", record.class_name, record.selector,
                record.after_source, record.before_source)
    if kind == "removeMethod":
        return ("defineMethod", record.class_name, record.selector,
                None, record.before_source)
    raise JournalError(f"cannot invert record kind {kind!r}")


def rollback_plan(records, to_seq):
    """Inverse actions, newest first, that rewind past every record > to_seq."""
    if to_seq < 0 or to_seq > len(records):
        raise JournalError(f"rollback target {to_seq} out of range 0..{len(records)}")
    return [invert(r) for r in reversed(records[to_seq:])]


_shell_cache = {}


def parse_class_shell(shell_source):
    """(super_name, fields) of a journaled class shell; memoized, the same
    few shells are re-parsed constantly during replay and rollback."""
    cached = _shell_cache.get(shell_source)
    if cached is None:
        from .parser import parse_program

        decls = parse_program(shell_source)
        if len(decls) != 1:
            raise JournalError("class record does not hold exactly one declaration")
        decl = decls[0]
        cached = (decl.super_name or "Object", tuple(decl.fields))
        _shell_cache[shell_source] = cached
    return cached[0], list(cached[1])


_parse_shell = parse_class_shell
