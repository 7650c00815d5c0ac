"""The live world: class registry, method dictionaries, and the object heap.

Values are represented directly as Python ints, strings, bools, None and
lists, plus Symbol, ObjectRef, ClassValue and BlockClosure wrappers. Objects
have stable integer identities that survive class redefinition and journal
rollback. Every code change flows through this module and is journaled.
"""

from .journal import Journal, digest_of_state
from . import journal as journal_mod
from .nodes import Symbol
from .parser import parse_method
from .rewrite import RewriteError, compile_deprecation
from .unparse import class_shell

BUILTIN_CLASS_NAMES = ("Object", "Integer", "String", "Symbol", "Boolean",
                       "UndefinedObject", "Array", "Block", "TestCase")

VOWELS = "AEIOU"


class WorldError(Exception):
    pass


class MethodDef:
    __slots__ = ("owner", "selector", "node", "source_text", "pragmas", "deprecation")

    def __init__(self, owner, selector, node, source_text, deprecation=None):
        self.owner = owner
        self.selector = selector
        self.node = node
        self.source_text = source_text
        self.pragmas = node.pragmas
        self.deprecation = deprecation

    def __repr__(self):
        return f"<MethodDef {self.owner}>>{self.selector}>"


class ClassRef:
    __slots__ = ("name", "super_name", "field_names", "method_dict", "builtin")

    def __init__(self, name, super_name, field_names, builtin=False):
        self.name = name
        self.super_name = super_name
        self.field_names = list(field_names)
        self.method_dict = {}
        self.builtin = builtin

    def __repr__(self):
        return f"<ClassRef {self.name}>"


class ObjectRef:
    __slots__ = ("object_id", "class_ref", "fields")

    def __init__(self, object_id, class_ref, fields):
        self.object_id = object_id
        self.class_ref = class_ref
        self.fields = fields

    def __repr__(self):
        return f"<ObjectRef {self.object_id} {self.class_ref.name}>"


class ClassValue:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __eq__(self, other):
        return isinstance(other, ClassValue) and other.name == self.name

    def __hash__(self):
        return hash(("ClassValue", self.name))

    def __repr__(self):
        return f"<ClassValue {self.name}>"


class BlockClosure:
    __slots__ = ("params", "body", "env", "receiver", "home_frame_id",
                 "home_method", "node")

    def __init__(self, params, body, env, receiver, home_frame_id, home_method, node):
        self.params = params
        self.body = body
        self.env = env
        self.receiver = receiver
        self.home_frame_id = home_frame_id
        self.home_method = home_method
        self.node = node


class ObjectBreakpoint:
    __slots__ = ("breakpoint_id", "object_id", "selector", "enabled")

    def __init__(self, breakpoint_id, object_id, selector=None):
        self.breakpoint_id = breakpoint_id
        self.object_id = object_id
        self.selector = selector  # None halts on any message
        self.enabled = True


class StepCommand:
    __slots__ = ("name", "spec")

    def __init__(self, name, spec):
        self.name = name
        self.spec = spec


class StepPredicate:
    """Frame predicate for programmable stepping; evaluated side-effect free."""

    KINDS = ("selectorIs", "selectorMatches", "receiverClassIs", "receiverIs")
    __slots__ = ("kind", "value")

    def __init__(self, kind, value):
        if kind not in self.KINDS:
            raise WorldError(f"unknown step predicate kind {kind!r}")
        self.kind = kind
        self.value = value

    def to_dict(self):
        return {"kind": self.kind, "value": self.value}


class World:
    def __init__(self):
        self.journal = Journal()
        self.classes = {}
        self.heap = {}
        self.breakpoints = {}
        self.step_commands = {}
        self.next_object_id = 1
        self.next_breakpoint_id = 1
        self.frozen = False  # set during contained evaluation: no journaling
        for name in BUILTIN_CLASS_NAMES:
            super_name = None if name == "Object" else "Object"
            self.classes[name] = ClassRef(name, super_name, [], builtin=True)

    # -- class registry ------------------------------------------------------

    def has_class(self, name):
        return name in self.classes

    def class_named(self, name):
        cref = self.classes.get(name)
        if cref is None:
            raise WorldError(f"unknown class {name!r}")
        return cref

    def chain(self, cref):
        """Yield cref then its superclasses; tolerates orphaned supers."""
        seen = set()
        while cref is not None and cref.name not in seen:
            seen.add(cref.name)
            yield cref
            cref = self.classes.get(cref.super_name) if cref.super_name else None

    def effective_fields(self, cref):
        names = []
        for klass in reversed(list(self.chain(cref))):
            for field in klass.field_names:
                if field not in names:
                    names.append(field)
        return names

    def descends_from(self, cref, ancestor_name):
        return any(k.name == ancestor_name for k in self.chain(cref))

    def define_class(self, decl, origin="user"):
        name = decl.name
        super_name = decl.super_name or "Object"
        if super_name not in self.classes:
            raise WorldError(f"unknown superclass {super_name!r}")
        self._check_acyclic(name, super_name)
        existing = self.classes.get(name)
        if existing is not None and existing.builtin:
            raise WorldError(f"cannot redefine built-in class {name}")
        inherited = self.effective_fields(self.classes[super_name])
        clash = set(inherited) & set(decl.fields)
        if clash:
            raise WorldError(f"fields {sorted(clash)} already declared on the "
                             f"superclass chain of {name}")
        for method in decl.methods:
            try:
                compile_deprecation(method)  # validate pragmas before journaling
            except RewriteError as err:
                raise WorldError(f"{name}>>{method.selector}: {err}") from None
        shell_after = class_shell(name, super_name, decl.fields)
        if existing is None:
            cref = ClassRef(name, super_name, decl.fields)
            self._journal("defineClass", name, None, None, shell_after, origin)
            self.classes[name] = cref
        else:
            cref = existing
            shell_before = class_shell(name, cref.super_name, cref.field_names)
            self._journal("redefineClass", name, None, shell_before, shell_after, origin)
            cref.super_name = super_name
            cref.field_names = list(decl.fields)
            self._migrate_instances()
            dropped = sorted(set(cref.method_dict) - {m.selector for m in decl.methods})
            for selector in dropped:
                self.remove_method(name, selector, origin)
        for method in decl.methods:
            self._install_method(cref, method, method.source_text, origin)
        return cref

    def _check_acyclic(self, name, super_name):
        walker = super_name
        while walker is not None:
            if walker == name:
                raise WorldError(f"cyclic inheritance through {name!r}")
            parent = self.classes.get(walker)
            walker = parent.super_name if parent else None

    # -- methods ---------------------------------------------------------------

    def define_method(self, class_name, source, origin="user"):
        cref = self.class_named(class_name)
        method = parse_method(source)
        return self._install_method(cref, method, source.strip(), origin)

    def _install_method(self, cref, method_node, source_text, origin):
        try:
            deprecation = compile_deprecation(method_node)
        except RewriteError as err:
            raise WorldError(str(err)) from None
        mdef = MethodDef(cref.name, method_node.selector, method_node,
                         source_text, deprecation)
        previous = cref.method_dict.get(method_node.selector)
        if previous is None:
            self._journal("defineMethod", cref.name, mdef.selector,
                          None, source_text, origin)
        else:
            self._journal("redefineMethod", cref.name, mdef.selector,
                          previous.source_text, source_text, origin)
        cref.method_dict[mdef.selector] = mdef
        return mdef

    def remove_method(self, class_name, selector, origin="user"):
        cref = self.class_named(class_name)
        mdef = cref.method_dict.get(selector)
        if mdef is None:
            raise WorldError(f"{class_name} does not define {selector!r}")
        self._journal("removeMethod", class_name, selector,
                      mdef.source_text, None, origin)
        del cref.method_dict[selector]

    def lookup_method(self, class_name, selector):
        cref = self.class_named(class_name)
        for klass in self.chain(cref):
            mdef = klass.method_dict.get(selector)
            if mdef is not None:
                return mdef
        return None

    def lookup_method_for(self, value, selector):
        """Method lookup keyed on a runtime value's class chain."""
        cref = (value.class_ref if isinstance(value, ObjectRef)
                else self.classes.get(self.class_of_value(value)))
        if cref is None:
            return None
        for klass in self.chain(cref):
            mdef = klass.method_dict.get(selector)
            if mdef is not None:
                return mdef
        return None

    # -- heap --------------------------------------------------------------------

    def instantiate(self, class_name):
        cref = self.class_named(class_name)
        fields = {name: None for name in self.effective_fields(cref)}
        obj = ObjectRef(self.next_object_id, cref, fields)
        self.next_object_id += 1
        self.heap[obj.object_id] = obj
        return obj

    def object_by_id(self, object_id):
        obj = self.heap.get(object_id)
        if obj is None:
            raise WorldError(f"unknown object id {object_id}")
        return obj

    def _migrate_instances(self):
        # Layout changes ripple to subclasses; recomputing every object's
        # field dict by name is cheap at kernel scale and always correct.
        for obj in self.heap.values():
            layout = self.effective_fields(obj.class_ref)
            obj.fields = {name: obj.fields.get(name) for name in layout}

    # -- values --------------------------------------------------------------------

    def class_of_value(self, value):
        if isinstance(value, bool):
            return "Boolean"
        if isinstance(value, int):
            return "Integer"
        if isinstance(value, str):
            return "String"
        if isinstance(value, Symbol):
            return "Symbol"
        if value is None:
            return "UndefinedObject"
        if isinstance(value, list):
            return "Array"
        if isinstance(value, BlockClosure):
            return "Block"
        if isinstance(value, ClassValue):
            return self.class_named(value.name).name
        if isinstance(value, ObjectRef):
            return value.class_ref.name
        raise WorldError(f"value of unknown kind: {value!r}")

    # -- breakpoints and step commands ---------------------------------------------

    def set_breakpoint(self, object_id, selector=None):
        self.object_by_id(object_id)
        bp = ObjectBreakpoint(self.next_breakpoint_id, object_id, selector)
        self.next_breakpoint_id += 1
        self.breakpoints[bp.breakpoint_id] = bp
        return bp

    def clear_breakpoint(self, breakpoint_id):
        if breakpoint_id not in self.breakpoints:
            raise WorldError(f"unknown breakpoint id {breakpoint_id}")
        del self.breakpoints[breakpoint_id]

    def breakpoint_hit(self, receiver, selector):
        if not isinstance(receiver, ObjectRef) or not self.breakpoints:
            return None
        for bp in self.breakpoints.values():
            if (bp.enabled and bp.object_id == receiver.object_id
                    and (bp.selector is None or bp.selector == selector)):
                return bp
        return None

    def register_step_command(self, name, spec):
        if not name:
            raise WorldError("step command name must be non-empty")
        if name in self.step_commands:
            raise WorldError(f"step command {name!r} already registered")
        command = StepCommand(name, spec)
        self.step_commands[name] = command
        return command

    # -- journal and rollback ----------------------------------------------------------

    def _journal(self, kind, class_name, selector, before, after, origin):
        if self.frozen:
            raise WorldError("code changes are not allowed during inspection")
        return self.journal.append(kind, class_name, selector, before, after, origin)

    def code_state(self):
        state = {}
        for name, cref in self.classes.items():
            methods = {sel: mdef.source_text for sel, mdef in cref.method_dict.items()}
            if cref.builtin:
                if not methods:
                    continue
                # Built-in shells are immutable; canonical entries pin them to
                # a constant shape so replayed journals agree.
                state[name] = {"super": "Object", "fields": [], "methods": methods}
            else:
                state[name] = {"super": cref.super_name, "fields": list(cref.field_names),
                               "methods": methods}
        return state

    def digest(self):
        return digest_of_state(self.code_state())

    def rollback_to(self, seq):
        """Append inverse actions for every record past seq; newest first.

        History is never rewritten: the journal grows by exactly one record
        per undone record, each with origin "rollback". Live objects keep
        their identities; only code state moves.
        """
        plan = journal_mod.rollback_plan(self.journal.records, seq)
        start = self.journal.latest_seq
        for kind, class_name, selector, _current, target in plan:
            if kind == "removeClass":
                cref = self.class_named(class_name)
                shell = class_shell(class_name, cref.super_name, cref.field_names)
                self._journal("removeClass", class_name, None, shell, None, "rollback")
                del self.classes[class_name]
            elif kind == "defineClass":
                super_name, fields = _shell_parts(target)
                self._journal("defineClass", class_name, None, None, target, "rollback")
                self.classes[class_name] = ClassRef(class_name, super_name, fields)
                self._migrate_instances()
            elif kind == "redefineClass":
                cref = self.class_named(class_name)
                shell_before = class_shell(class_name, cref.super_name, cref.field_names)
                super_name, fields = _shell_parts(target)
                self._journal("redefineClass", class_name, None,
                              shell_before, target, "rollback")
                cref.super_name = super_name
                cref.field_names = fields
                self._migrate_instances()
            elif kind in ("defineMethod", "redefineMethod"):
                self.define_method(class_name, target, origin="rollback")
            elif kind == "removeMethod":
                self.remove_method(class_name, selector, origin="rollback")
        return self.journal.records[start:]


def _shell_parts(shell_source):
    return journal_mod.parse_class_shell(shell_source)


def default_print_string(world, value, print_element=None):
    """Print string used when no user printString method applies."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "nil"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    if isinstance(value, Symbol):
        return "#" + value.name
    if isinstance(value, list):
        printer = print_element or (lambda v: default_print_string(world, v))
        return "#( " + " ".join(printer(v) for v in value) + " )" if value else "#( )"
    if isinstance(value, BlockClosure):
        return "a Block"
    if isinstance(value, ClassValue):
        return value.name
    if isinstance(value, ObjectRef):
        name = value.class_ref.name
        article = "an" if name[0] in VOWELS else "a"
        return f"{article} {name}"
    raise WorldError(f"value of unknown kind: {value!r}")
