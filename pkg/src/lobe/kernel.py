"""Kernel facade: one live world plus every operation the tools call.

The kernel owns the world, the open debug sessions, and the event stream
(pauses, deprecation warnings). Protocol server, CLI, test harness and
inspector all go through here; nothing else mutates the world.
"""

import os

from .interp import (
    ContainedError,
    DEFAULT_FUEL,
    DONE,
    Env,
    Execution,
    Frame,
    PAUSED,
    PauseReason,
    predicate_matches,
)
from .journal import JournalError
from .nodes import Symbol, selector_arity
from .objspace import (
    BlockClosure,
    ClassValue,
    ObjectRef,
    StepPredicate,
    World,
    WorldError,
    default_print_string,
)
from .parser import LobSyntaxError, parse_method, parse_program, parse_statements
from .rewrite import RewriteError, implementors_of, senders_of

CONTAINED_FUEL = 200_000


class KernelError(Exception):
    pass


class DebugSession:
    """A paused execution held open for inspection and repair."""

    def __init__(self, session_id, execution, label=None):
        self.session_id = session_id
        self.execution = execution
        self.label = label
        self.open = True
        self.result = None

    @property
    def reason(self):
        return self.execution.reason


class Kernel:
    def __init__(self, fuel=None):
        env_fuel = os.environ.get("LOBE_FUEL")
        self.default_fuel = fuel or (int(env_fuel) if env_fuel else DEFAULT_FUEL)
        self.world = World()
        self.world_creations = 1  # never grows: the world lives as long as we do
        self.sessions = {}
        self.transients = {}
        self.views = {}
        self._frame_counter = 0
        self._session_counter = 0
        self._view_counter = 0
        self._contained_depth = 0
        self._event_sinks = []

    # -- identifiers and events ------------------------------------------------

    def next_frame_id(self):
        self._frame_counter += 1
        return self._frame_counter

    def add_event_sink(self, sink):
        self._event_sinks.append(sink)

    def emit_event(self, event):
        for sink in self._event_sinks:
            sink(event)

    # -- loading and code operations ---------------------------------------------

    def load_file(self, path):
        try:
            with open(path, "r", encoding="utf-8") as handle:
                source = handle.read()
        except OSError as err:
            raise KernelError(f"cannot read {path}: {err.strerror}") from None
        return self.load_source(source)

    def load_source(self, source):
        decls = parse_program(source)
        names = []
        for decl in decls:
            self.world.define_class(decl, origin="user")
            names.append(decl.name)
        return names

    def define_method(self, class_name, source, origin="user"):
        return self.world.define_method(class_name, source, origin)

    def remove_method(self, class_name, selector, origin="user"):
        self.world.remove_method(class_name, selector, origin)

    def method_source(self, class_name, selector):
        mdef = self.world.class_named(class_name).method_dict.get(selector)
        if mdef is None:
            raise KernelError(f"{class_name} does not define {selector!r}")
        return mdef.source_text

    def list_classes(self):
        rows = []
        for name in sorted(self.world.classes):
            cref = self.world.classes[name]
            rows.append({
                "name": name,
                "superName": cref.super_name,
                "fields": list(cref.field_names),
                "selectors": sorted(cref.method_dict),
                "builtin": cref.builtin,
            })
        return rows

    # -- evaluation -----------------------------------------------------------------

    def evaluate(self, source, fuel=None, receiver=None, label=None):
        """Evaluate statements against the live world.

        Returns {'value': v} on completion or {'paused': True, 'sessionId',
        'session'} when the execution paused into a debug session.
        """
        temps, statements = parse_statements(source)
        execution = Execution(self, fuel=fuel)
        execution.push_top_frame(statements, receiver=receiver, temps=temps)
        execution.run()
        return self.finish_run(execution, label=label)

    def finish_run(self, execution, label=None):
        if execution.state == DONE:
            return {"value": execution.result, "failedAssertions": execution.failed_assertions}
        session = self.open_session(execution, label=label)
        return {"paused": True, "sessionId": session.session_id, "session": session}

    def open_session(self, execution, label=None):
        self._session_counter += 1
        session = DebugSession(self._session_counter, execution, label=label)
        self.sessions[session.session_id] = session
        self._emit_paused(session)
        return session

    def contained_send(self, receiver, selector):
        """Run a unary send in a contained, read-only evaluation.

        Pauses become ContainedError; the journal is frozen, so inspection
        can never record code changes.
        """
        _temps, statements = parse_statements(f"self {selector}")
        execution = Execution(self, fuel=CONTAINED_FUEL, interactive=False)
        execution.push_top_frame(statements, receiver=receiver)
        self._contained_depth += 1
        self.world.frozen = True
        try:
            execution.run()
        finally:
            self._contained_depth -= 1
            self.world.frozen = self._contained_depth > 0
        return execution.result

    # -- print strings --------------------------------------------------------------

    def print_value(self, value):
        """Best-effort print string: user printString when sound, else default."""
        mdef = self.world.lookup_method_for(value, "printString")
        if mdef is not None:
            try:
                result = self.contained_send(value, "printString")
            except ContainedError:
                result = None
            if isinstance(result, str):
                return result
            return default_print_string(self.world, value, self.print_value)
        return default_print_string(self.world, value, self.print_value)

    def print_string_of(self, object_id):
        """Print string of a live object; a broken override is an error here."""
        value = self.value_by_id(object_id)
        mdef = self.world.lookup_method_for(value, "printString")
        if mdef is None:
            return default_print_string(self.world, value, self.print_value)
        try:
            result = self.contained_send(value, "printString")
        except ContainedError as err:
            raise KernelError(f"print error: {err}") from None
        if not isinstance(result, str):
            raise KernelError("print error: printString did not answer a string")
        return result

    def value_by_id(self, object_id):
        if object_id in self.world.heap:
            return self.world.heap[object_id]
        if object_id in self.transients:
            return self.transients[object_id]
        raise KernelError(f"unknown object id {object_id}")

    def register_transient(self, value):
        """Session-scoped id for a non-heap value, so literals are navigable."""
        object_id = self.world.next_object_id
        self.world.next_object_id += 1
        self.transients[object_id] = value
        return object_id

    def navigable_id(self, value):
        if isinstance(value, ObjectRef):
            return value.object_id
        if value is None or value is True or value is False:
            return None
        return self.register_transient(value)

    # -- sessions ----------------------------------------------------------------------

    def session(self, session_id):
        session = self.sessions.get(session_id)
        if session is None:
            raise KernelError(f"unknown session {session_id}")
        return session

    def open_session_named(self, session_id):
        session = self.session(session_id)
        if not session.open:
            raise KernelError(f"session {session_id} is closed")
        return session

    def list_sessions(self):
        rows = []
        for session in self.sessions.values():
            if session.open:
                rows.append({
                    "sessionId": session.session_id,
                    "reason": self.encode_reason(session.reason),
                    "label": session.label,
                    "frames": len(session.execution.frames),
                })
        return rows

    def session_stack(self, session_id):
        session = self.open_session_named(session_id)
        return [self.frame_row(frame) for frame in reversed(session.execution.frames)]

    def step(self, session_id, mode="into"):
        if mode not in ("into", "over"):
            raise KernelError(f"unknown step mode {mode!r}")
        session = self.open_session_named(session_id)
        execution = session.execution
        execution.prepare_resume()
        depth0 = len(execution.frames)
        while True:
            event = execution.run_to_boundary()
            kind = event[0]
            if kind == "pause":
                break
            if kind == "done":
                return self._close_session(session)
            if mode == "into" or event[1] <= depth0:
                execution.state = PAUSED
                execution.reason = PauseReason("stepComplete")
                break
        self._emit_paused(session)
        return self.paused_payload(session)

    def step_until(self, session_id, spec=None, command=None, budget=100_000):
        session = self.open_session_named(session_id)
        if command is not None:
            registered = self.world.step_commands.get(command)
            if registered is None:
                raise KernelError(f"unknown step command {command!r}")
            spec = registered.spec
        if spec is None:
            raise KernelError("stepUntil needs a predicate or a registered command")
        if isinstance(spec, dict):
            spec = StepPredicate(spec["kind"], spec["value"])
        execution = session.execution
        execution.prepare_resume()
        steps = 0
        while steps < budget:
            event = execution.run_to_boundary()
            steps += 1
            kind = event[0]
            if kind == "pause":
                self._emit_paused(session)
                return self.paused_payload(session)
            if kind == "done":
                return self._close_session(session)
            if kind == "enter" and predicate_matches(self.world, spec, event[2]):
                execution.state = PAUSED
                execution.reason = PauseReason("stepComplete")
                self._emit_paused(session)
                return self.paused_payload(session)
        execution.state = PAUSED
        execution.reason = PauseReason("fuelExhausted")
        self._emit_paused(session)
        return self.paused_payload(session)

    def resume(self, session_id):
        session = self.open_session_named(session_id)
        execution = session.execution
        execution.prepare_resume()
        execution.run()
        if execution.state == DONE:
            return self._close_session(session)
        self._emit_paused(session)
        return self.paused_payload(session)

    def restart_frame(self, session_id, frame_id):
        session = self.open_session_named(session_id)
        execution = session.execution
        index, frame = execution.find_frame(frame_id)
        if frame is None:
            raise KernelError(f"unknown frame {frame_id} in session {session_id}")
        if frame.kind == Frame.METHOD:
            mdef = self.world.lookup_method_for(frame.receiver, frame.method.selector)
            if mdef is None:
                raise KernelError(
                    f"{frame.method.selector!r} is no longer defined for the receiver")
            frame.method = mdef
            frame.body = mdef.node.body
            env = Env()
            for name, value in zip(mdef.node.params, frame.args):
                env.define(name, value)
            for name in mdef.node.temps:
                env.define(name, None)
            frame.env = env
        elif frame.kind == Frame.TOP:
            frame.env = Env()
        else:
            raise KernelError("only method frames can be restarted")
        frame.stmt_index = 0
        frame.tasks = []
        frame.last_value = None
        del execution.frames[index + 1:]
        execution.failed_assertions = frame.failures_at_entry
        execution.pending_send = None
        execution.state = PAUSED
        execution.reason = PauseReason("stepComplete")
        self._emit_paused(session)
        return self.paused_payload(session)

    def create_missing_method(self, session_id, body_source=None):
        session = self.open_session_named(session_id)
        execution = session.execution
        reason = execution.reason
        if reason is None or reason.kind != "messageNotUnderstood":
            raise KernelError("session is not paused on a missing method")
        receiver, selector, args = execution.pending_send
        class_name = self.world.class_of_value(receiver)
        source = _method_stub(selector, body_source)
        parse_method(source)  # surface syntax errors before touching the world
        mdef = self.world.define_method(class_name, source, origin="debugger")
        top = execution.frames[-1]
        if top.kind != Frame.PENDING:
            raise KernelError("pending send frame is gone; cannot insert the call")
        execution.frames.pop()
        caller_task = execution.frames[-1].tasks[-1]
        if caller_task.meta.get("stage") == "mnu":
            caller_task.meta["stage"] = "wait"
        execution.push_method_frame(mdef, receiver, args)
        execution.pending_send = None
        execution.reason = PauseReason("stepComplete")
        self._emit_paused(session)
        payload = self.paused_payload(session)
        payload["source"] = source
        return payload

    def recompile_frame_method(self, session_id, frame_id, new_source):
        session = self.open_session_named(session_id)
        execution = session.execution
        _index, frame = execution.find_frame(frame_id)
        if frame is None:
            raise KernelError(f"unknown frame {frame_id} in session {session_id}")
        if frame.kind != Frame.METHOD:
            raise KernelError("frame is not a method activation")
        method = parse_method(new_source)
        if method.selector != frame.method.selector:
            raise KernelError(
                f"selector mismatch: frame runs {frame.method.selector!r}, "
                f"source defines {method.selector!r}")
        self.world.define_method(frame.method.owner, new_source, origin="debugger")
        return self.restart_frame(session_id, frame_id)

    def _close_session(self, session):
        execution = session.execution
        session.open = False
        session.result = execution.result
        return {
            "completed": True,
            "value": execution.result,
            "failedAssertions": execution.failed_assertions,
        }

    # -- tests and inspection -----------------------------------------------------------

    def run_tests(self, filter_glob=None, auto_materialize=False):
        from . import harness

        return harness.run_tests(self, filter_glob=filter_glob,
                                 auto_materialize=auto_materialize)

    def materialize_try(self, session_id):
        from . import harness

        return harness.materialize_try(self, session_id)

    def inspect(self, object_id):
        from . import inspector

        return inspector.inspect_object(self, object_id)

    def view_content(self, object_id, view_id):
        from . import inspector

        return inspector.view_content(self, object_id, view_id)

    # -- breakpoints and step commands ----------------------------------------------------

    def set_object_breakpoint(self, object_id, selector=None):
        bp = self.world.set_breakpoint(object_id, selector)
        return bp.breakpoint_id

    def clear_breakpoint(self, breakpoint_id):
        self.world.clear_breakpoint(breakpoint_id)

    def register_step_command(self, name, spec):
        if isinstance(spec, dict):
            spec = StepPredicate(spec["kind"], spec["value"])
        return self.world.register_step_command(name, spec)

    def list_step_commands(self):
        return [{"name": c.name, "spec": c.spec.to_dict()}
                for c in self.world.step_commands.values()]

    # -- queries, journal ---------------------------------------------------------------------

    def senders_of(self, selector):
        return senders_of(self.world, selector)

    def implementors_of(self, selector):
        return implementors_of(self.world, selector)

    def journal_slice(self, from_seq=1, to_seq=None):
        if to_seq is None:
            to_seq = self.world.journal.latest_seq
        return self.world.journal.slice(from_seq, to_seq)

    def rollback_to(self, seq):
        return self.world.rollback_to(seq)

    # -- payload builders ------------------------------------------------------------------------

    def encode_value(self, value):
        kind = {
            "Boolean": "bool", "Integer": "int", "String": "string",
            "Symbol": "symbol", "UndefinedObject": "nil", "Array": "array",
            "Block": "block",
        }.get(self.world.class_of_value(value))
        if isinstance(value, ClassValue):
            kind = "class"
        elif isinstance(value, ObjectRef):
            kind = "object"
        payload = {"kind": kind, "value": self.print_value(value)}
        if isinstance(value, ObjectRef):
            payload["objectId"] = value.object_id
        return payload

    def encode_reason(self, reason):
        if reason is None:
            return None
        payload = {"kind": reason.kind}
        data = reason.data
        if reason.kind == "messageNotUnderstood":
            payload["selector"] = data["selector"]
            payload["receiver"] = self.encode_value(data["receiver"])
            payload["args"] = [self.encode_value(v) for v in data["args"]]
        elif reason.kind == "assertionFailure":
            payload["expected"] = self.encode_value(data["expected"])
            payload["actual"] = self.encode_value(data["actual"])
            payload["message"] = data.get("message", "")
        elif reason.kind == "tryAssertion":
            payload["value"] = self.encode_value(data["value"])
            payload["sendPath"] = list(data["send_path"])
            payload["frameId"] = data["frame_id"]
        elif reason.kind == "objectBreakpoint":
            payload["objectId"] = data["object_id"]
            payload["selector"] = data["selector"]
        elif reason.kind == "userError":
            payload["message"] = data["message"]
        return payload

    def frame_row(self, frame):
        receiver = frame.receiver
        class_name = frame.class_name
        if class_name is None and frame.kind == Frame.PENDING:
            class_name = self.world.class_of_value(receiver)
        temps = {name: self.print_value(v) for name, v in frame.temp_values().items()}
        return {
            "frameId": frame.frame_id,
            "kind": frame.kind,
            "className": class_name,
            "selector": frame.selector,
            "line": frame.pc_line(),
            "pc": list(frame.pc_path()),
            "receiver": self.print_value(receiver),
            "receiverId": receiver.object_id if isinstance(receiver, ObjectRef) else None,
            "args": [self.print_value(v) for v in frame.current_args()],
            "temps": temps,
        }

    def paused_payload(self, session):
        execution = session.execution
        return {
            "paused": True,
            "sessionId": session.session_id,
            "reason": self.encode_reason(execution.reason),
            "topFrame": self.frame_row(execution.frames[-1]) if execution.frames else None,
        }

    def _emit_paused(self, session):
        self.emit_event({
            "event": "paused",
            "sessionId": session.session_id,
            "reason": self.encode_reason(session.execution.reason),
            "topFrame": (self.frame_row(session.execution.frames[-1])
                         if session.execution.frames else None),
        })


def _method_stub(selector, body_source=None):
    arity = selector_arity(selector)
    params = [f"p{i + 1}" for i in range(arity)]
    if arity == 0:
        header = selector
    elif not selector.endswith(":"):
        header = f"{selector} {params[0]}"
    else:
        parts = [p + ":" for p in selector.split(":")[:-1]]
        header = " ".join(f"{part} {param}" for part, param in zip(parts, params))
    body = body_source.strip() if body_source else "self notYetImplemented"
    return f"{header} [\n    {body}\n]"
