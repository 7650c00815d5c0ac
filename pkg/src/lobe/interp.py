"""Tree-walking evaluator with reified frames and pausable executions.

The machine never recurses into the host stack for user code: each Frame
holds an explicit stack of Tasks (one per AST node under evaluation), so an
execution can stop between any two steps and be resumed, stepped, or have
frames restarted. Failures do not unwind; they flip the execution into a
paused state carrying a PauseReason, and debugger operations work on the
frames as data.

One "step" is one node-level event: a send completing or entering a method,
an assignment, or a return. Message sends (explicit and the implicit block
invocations performed by control-flow built-ins) consume fuel; running out
of fuel is a pause, not an abort, so infinite loops stay debuggable.
"""

from fnmatch import fnmatchcase

from .nodes import (
    AssignNode,
    BlockNode,
    LiteralNode,
    MetaVarNode,
    ReturnNode,
    SelfNode,
    SendNode,
    Symbol,
    VarReadNode,
    selector_arity,
)
from .objspace import (
    BlockClosure,
    ClassValue,
    ObjectRef,
    default_print_string,
)
from .rewrite import on_deprecated_activation

DEFAULT_FUEL = 10_000_000

RUNNING, PAUSED, DONE = "running", "paused", "done"

NOT_HANDLED = object()

_ARITH = {"+", "-", "*", "/"}
_COMPARE = {"<", "<=", ">", ">="}
_TESTCASE_SELECTORS = {"assert:", "deny:", "assert:equals:", "try:"}


class InterpreterError(Exception):
    """Internal invariant violation; user-level failures pause instead."""


class ContainedError(Exception):
    """A pause raised as an error inside a contained (read-only) evaluation."""


class PauseReason:
    __slots__ = ("kind", "data")

    def __init__(self, kind, **data):
        self.kind = kind
        self.data = data

    def __getattr__(self, name):
        try:
            return self.data[name]
        except KeyError:
            raise AttributeError(name) from None

    def describe(self):
        if self.kind == "messageNotUnderstood":
            return f"does not understand {self.data['selector']}"
        if self.kind == "userError":
            return self.data["message"]
        if self.kind == "assertionFailure":
            return self.data.get("message") or "assertion failed"
        if self.kind == "fuelExhausted":
            return "fuel exhausted"
        return self.kind

    def __repr__(self):
        return f"<PauseReason {self.kind} {self.data}>"


class Cell:
    __slots__ = ("value",)

    def __init__(self, value=None):
        self.value = value


class Env:
    """Name -> Cell chain. Blocks share their home cells by reference."""

    __slots__ = ("cells", "parent")

    def __init__(self, cells=None, parent=None):
        self.cells = cells or {}
        self.parent = parent

    def find(self, name):
        env = self
        while env is not None:
            cell = env.cells.get(name)
            if cell is not None:
                return cell
            env = env.parent
        return None

    def define(self, name, value):
        cell = Cell(value)
        self.cells[name] = cell
        return cell


class Task:
    """One node (or synthetic send) under evaluation inside a frame."""

    __slots__ = ("node", "phase", "values", "meta")

    def __init__(self, node, phase=0, values=None, meta=None):
        self.node = node
        self.phase = phase
        self.values = values if values is not None else []
        self.meta = meta if meta is not None else {}


def synthetic_send(node, selector, receiver, args):
    """A send task with the receiver and arguments already evaluated."""
    values = [receiver] + list(args)
    return Task(node, phase=len(values), values=values,
                meta={"synthetic_selector": selector})


class Frame:
    METHOD, BLOCK, TOP, PENDING = "method", "block", "top", "pending"

    __slots__ = ("frame_id", "kind", "method", "receiver", "args", "env",
                 "body", "stmt_index", "tasks", "last_value", "home_frame_id",
                 "failures_at_entry", "pending_selector")

    def __init__(self, frame_id, kind, method, receiver, args, env, body,
                 home_frame_id=None, pending_selector=None):
        self.frame_id = frame_id
        self.kind = kind
        self.method = method
        self.receiver = receiver
        self.args = args
        self.env = env
        self.body = body
        self.stmt_index = 0
        self.tasks = []
        self.last_value = None
        self.home_frame_id = home_frame_id
        self.failures_at_entry = 0
        self.pending_selector = pending_selector

    @property
    def selector(self):
        if self.kind == Frame.METHOD:
            return self.method.selector
        if self.kind == Frame.BLOCK:
            home = self.method.selector if self.method else "doIt"
            return f"[] in {home}"
        if self.kind == Frame.PENDING:
            return self.pending_selector
        return "doIt"

    @property
    def class_name(self):
        if self.method is not None:
            return self.method.owner
        return None

    def pc_path(self):
        for task in reversed(self.tasks):
            if task.node is not None:
                return task.node.path
        if self.stmt_index < len(self.body):
            return self.body[self.stmt_index].path
        return ()

    def pc_line(self):
        for task in reversed(self.tasks):
            if task.node is not None:
                return task.node.line
        if self.stmt_index < len(self.body):
            return self.body[self.stmt_index].line
        return self.method.node.line if self.kind == Frame.METHOD else 0

    def param_names(self):
        if self.kind == Frame.METHOD:
            return self.method.node.params
        return []

    def current_args(self):
        names = self.param_names()
        if not names:
            return list(self.args)
        out = []
        for i, name in enumerate(names):
            cell = self.env.find(name)
            out.append(cell.value if cell else (self.args[i] if i < len(self.args) else None))
        return out

    def temp_values(self):
        names = []
        if self.kind == Frame.METHOD:
            names = self.method.node.temps
        elif self.kind == Frame.TOP:
            names = list(self.env.cells.keys())
        elif self.kind == Frame.BLOCK:
            names = [n for n in self.env.cells.keys()]
        out = {}
        for name in names:
            cell = self.env.find(name)
            out[name] = cell.value if cell else None
        return out


class Execution:
    def __init__(self, kernel, fuel=None, interactive=True):
        self.kernel = kernel
        self.world = kernel.world
        self.frames = []
        self.state = RUNNING
        self.reason = None
        self.result = None
        self.base_fuel = fuel if fuel is not None else kernel.default_fuel
        self.fuel = self.base_fuel
        self.sends_used = 0
        self.failed_assertions = 0
        self.pending_send = None
        self.interactive = interactive

    # -- frame construction --------------------------------------------------

    def _new_frame_id(self):
        return self.kernel.next_frame_id()

    def push_top_frame(self, statements, receiver=None, temps=()):
        env = Env()
        for name in temps:
            env.define(name, None)
        frame = Frame(self._new_frame_id(), Frame.TOP, None, receiver, [],
                      env, statements)
        self.frames.append(frame)
        return frame

    def push_method_frame(self, mdef, receiver, args):
        env = Env()
        for name, value in zip(mdef.node.params, args):
            env.define(name, value)
        for name in mdef.node.temps:
            env.define(name, None)
        frame = Frame(self._new_frame_id(), Frame.METHOD, mdef, receiver,
                      list(args), env, mdef.node.body)
        frame.failures_at_entry = self.failed_assertions
        self.frames.append(frame)
        return frame

    def push_block_frame(self, closure, args):
        env = Env(parent=closure.env)
        for name, value in zip(closure.params, args):
            env.define(name, value)
        frame = Frame(self._new_frame_id(), Frame.BLOCK, closure.home_method,
                      closure.receiver, list(args), env, closure.body,
                      home_frame_id=closure.home_frame_id)
        frame.failures_at_entry = self.failed_assertions
        self.frames.append(frame)
        return frame

    def push_pending_frame(self, receiver, selector, args):
        frame = Frame(self._new_frame_id(), Frame.PENDING, None, receiver,
                      list(args), Env(), [], pending_selector=selector)
        self.frames.append(frame)
        return frame

    def find_frame(self, frame_id):
        for index, frame in enumerate(self.frames):
            if frame.frame_id == frame_id:
                return index, frame
        return None, None

    # -- pause/resume plumbing ----------------------------------------------

    def pause(self, reason):
        if not self.interactive:
            raise ContainedError(reason.describe())
        self.state = PAUSED
        self.reason = reason

    def prepare_resume(self):
        """Clear the paused state; re-arm a pending send for re-dispatch."""
        if self.frames and self.frames[-1].kind == Frame.PENDING:
            self.frames.pop()
            caller = self.frames[-1]
            task = caller.tasks[-1]
            if task.meta.get("stage") == "mnu":
                task.meta["stage"] = None
        self.fuel = self.sends_used + self.base_fuel
        self.state = RUNNING
        self.reason = None

    # -- the machine ----------------------------------------------------------

    def run(self):
        while self.state == RUNNING:
            self.tick()

    def run_to_boundary(self):
        """Advance until one step event, a pause, or completion."""
        while True:
            event = self.tick()
            if self.state == PAUSED:
                return ("pause", len(self.frames))
            if self.state == DONE:
                return ("done", 0)
            if event is not None:
                return event

    def tick(self):
        frame = self.frames[-1]
        if frame.kind == Frame.PENDING:
            raise InterpreterError("pending send frame cannot execute")
        if not frame.tasks:
            if frame.stmt_index < len(frame.body):
                frame.tasks.append(Task(frame.body[frame.stmt_index]))
                return None
            return self._frame_fell_off(frame)
        task = frame.tasks[-1]
        stage = task.meta.get("stage")
        if stage == "result":
            task.meta["stage"] = None
            if task.meta.get("bi"):
                return self._builtin_continue(frame, task)
            return self._complete(frame, task, task.values[-1])
        if stage in ("wait", "mnu"):
            raise InterpreterError(f"task in stage {stage!r} should not be ticked")
        node = task.node
        if task.meta.get("synthetic_selector") or isinstance(node, SendNode):
            return self._tick_send(frame, task)
        if isinstance(node, LiteralNode):
            return self._complete(frame, task, _literal_value(node.value))
        if isinstance(node, VarReadNode):
            return self._tick_var_read(frame, task, node)
        if isinstance(node, SelfNode):
            return self._complete(frame, task, frame.receiver)
        if isinstance(node, AssignNode):
            return self._tick_assign(frame, task, node)
        if isinstance(node, ReturnNode):
            return self._tick_return(frame, task, node)
        if isinstance(node, BlockNode):
            return self._complete(frame, task, self._make_closure(frame, node))
        if isinstance(node, MetaVarNode):
            self.pause(PauseReason("userError",
                                   message="metavariable outside a pattern"))
            return None
        raise InterpreterError(f"unknown node {node!r}")

    # -- simple node handlers ---------------------------------------------------

    def _complete(self, frame, task, value):
        frame.tasks.pop()
        if frame.tasks:
            self._deliver(frame.tasks[-1], value)
        else:
            frame.last_value = value
            frame.stmt_index += 1
        return None

    def _deliver(self, task, value):
        task.values.append(value)
        if task.meta.get("stage") == "wait":
            task.meta["stage"] = "result"

    def _tick_var_read(self, frame, task, node):
        cell = frame.env.find(node.name)
        if cell is not None:
            return self._complete(frame, task, cell.value)
        receiver = frame.receiver
        if isinstance(receiver, ObjectRef) and node.name in receiver.fields:
            return self._complete(frame, task, receiver.fields[node.name])
        if node.name[0].isupper() and self.world.has_class(node.name):
            return self._complete(frame, task, ClassValue(node.name))
        self.pause(PauseReason("userError", message=f"unknown variable '{node.name}'"))
        return None

    def _tick_assign(self, frame, task, node):
        if task.phase == 0:
            task.phase = 1
            frame.tasks.append(Task(node.expr))
            return None
        value = task.values[0]
        cell = frame.env.find(node.name)
        if cell is not None:
            cell.value = value
        else:
            receiver = frame.receiver
            if isinstance(receiver, ObjectRef) and node.name in receiver.fields:
                receiver.fields[node.name] = value
            elif frame.kind == Frame.TOP:
                frame.env.define(node.name, value)
            else:
                self.pause(PauseReason(
                    "userError", message=f"unknown variable '{node.name}'"))
                return None
        self._complete(frame, task, value)
        return ("assign", len(self.frames))

    def _tick_return(self, frame, task, node):
        if task.phase == 0:
            task.phase = 1
            frame.tasks.append(Task(node.expr))
            return None
        value = task.values[0]
        if frame.kind == Frame.BLOCK:
            index, home = self.find_frame(frame.home_frame_id)
            if home is None:
                self.pause(PauseReason("userError", message="block cannot return"))
                return None
            del self.frames[index:]
            return self._after_unwind(value)
        self.frames.pop()
        return self._after_unwind(value)

    def _frame_fell_off(self, frame):
        if frame.kind == Frame.METHOD:
            value = frame.receiver
        else:
            value = frame.last_value
        self.frames.pop()
        return self._after_unwind(value)

    def _after_unwind(self, value):
        if not self.frames:
            self.state = DONE
            self.result = value
            return ("return", 0)
        caller = self.frames[-1]
        if not caller.tasks:
            raise InterpreterError("return without a waiting send")
        self._deliver(caller.tasks[-1], value)
        return ("return", len(self.frames))

    def _make_closure(self, frame, node):
        home_id = frame.home_frame_id if frame.kind == Frame.BLOCK else frame.frame_id
        home_method = frame.method
        return BlockClosure(node.params, node.body, frame.env, frame.receiver,
                            home_id, home_method, node)

    # -- sends ---------------------------------------------------------------------

    def _tick_send(self, frame, task):
        node = task.node
        if task.meta.get("synthetic_selector"):
            selector = task.meta["synthetic_selector"]
            n_args = len(task.values) - 1
        else:
            selector = node.selector
            n_args = len(node.args)
        if task.phase <= n_args:
            child = node.receiver if task.phase == 0 else node.args[task.phase - 1]
            task.phase += 1
            frame.tasks.append(Task(child))
            return None
        receiver = task.values[0]
        args = task.values[1:n_args + 1]
        return self._dispatch(frame, task, selector, receiver, args)

    def _consume_fuel(self, task=None):
        """One message send's worth of fuel; False when exhausted (paused)."""
        if task is not None and task.meta.get("fuel_counted"):
            return True
        if self.sends_used >= self.fuel:
            self.pause(PauseReason("fuelExhausted"))
            return False
        self.sends_used += 1
        if task is not None:
            task.meta["fuel_counted"] = True
        return True

    def _dispatch(self, frame, task, selector, receiver, args):
        meta = task.meta
        if meta.get("halted"):
            return self._finish_builtin(frame, task, receiver)
        if meta.get("errored"):
            return self._finish_builtin(frame, task, None)
        if meta.get("try_done"):
            return self._finish_builtin(frame, task, args[0])
        if meta.get("assert_done"):
            return self._finish_builtin(frame, task, receiver)
        if meta.get("bi"):
            # Re-entry into a paused built-in continuation (fuel ran out
            # between block invocations); the phases are idempotent.
            return self._builtin_continue(frame, task)
        if not self._consume_fuel(task):
            return None

        bp = None
        if self.interactive and not meta.get("bp_checked"):
            meta["bp_checked"] = True
            bp = self.world.breakpoint_hit(receiver, selector)

        mdef = self.world.lookup_method_for(receiver, selector)
        if mdef is not None:
            if mdef.deprecation is not None and self.interactive:
                self._deprecated_activation(frame, task, mdef)
            new_frame = self.push_method_frame(mdef, receiver, args)
            meta["stage"] = "wait"
            if bp is not None:
                self.pause(PauseReason("objectBreakpoint",
                                       object_id=receiver.object_id,
                                       selector=selector))
            return ("enter", len(self.frames), new_frame)

        if bp is not None:
            # No user method: pause before the primitive runs; the re-entry
            # skips the breakpoint via bp_checked and executes it.
            self.pause(PauseReason("objectBreakpoint",
                                   object_id=receiver.object_id,
                                   selector=selector))
            return None

        outcome = self._builtin_dispatch(frame, task, selector, receiver, args)
        if outcome is not NOT_HANDLED:
            return outcome

        if not self.interactive:
            raise ContainedError(f"does not understand {selector}")
        self.pending_send = (receiver, selector, args)
        meta["stage"] = "mnu"
        self.push_pending_frame(receiver, selector, args)
        self.pause(PauseReason("messageNotUnderstood", receiver=receiver,
                               selector=selector, args=list(args)))
        return None

    def _deprecated_activation(self, frame, task, mdef):
        caller_method = frame.method if frame.kind in (Frame.METHOD, Frame.BLOCK) else None
        caller_node = task.node if isinstance(task.node, SendNode) else None
        if task.meta.get("synthetic_selector"):
            caller_node = None
        if caller_method is not None and frame.class_name:
            label = f"{frame.class_name}>>{frame.selector}"
        else:
            label = "<top>"
        on_deprecated_activation(self.world, self.kernel.emit_event, mdef,
                                 caller_method, caller_node, label)

    # -- built-ins --------------------------------------------------------------------

    def _builtin_dispatch(self, frame, task, selector, rcv, args):
        world = self.world

        if selector in _ARITH and type(rcv) is int and type(args[0]) is int:
            if selector == "/" and args[0] == 0:
                task.meta["errored"] = True
                self.pause(PauseReason("userError", message="division by zero"))
                return None
            result = {"+": rcv + args[0], "-": rcv - args[0],
                      "*": rcv * args[0],
                      "/": rcv // args[0] if args[0] else 0}[selector]
            return self._finish_builtin(frame, task, result)
        if selector in _COMPARE:
            if type(rcv) is int and type(args[0]) is int:
                pass
            elif isinstance(rcv, str) and isinstance(args[0], str):
                pass
            else:
                return NOT_HANDLED
            result = {"<": rcv < args[0], "<=": rcv <= args[0],
                      ">": rcv > args[0], ">=": rcv >= args[0]}[selector]
            return self._finish_builtin(frame, task, result)
        if selector == "=":
            return self._finish_builtin(frame, task, value_equals(rcv, args[0]))
        if selector == "==":
            return self._finish_builtin(frame, task, identity_equals(rcv, args[0]))
        if selector == ",":
            if isinstance(rcv, str) and isinstance(args[0], str):
                return self._finish_builtin(frame, task, rcv + args[0])
            if isinstance(rcv, list) and isinstance(args[0], list):
                return self._finish_builtin(frame, task, rcv + args[0])
            return NOT_HANDLED
        if selector == "printString":
            text = self.kernel.print_value(rcv)
            return self._finish_builtin(frame, task, text)
        if selector == "class":
            return self._finish_builtin(frame, task,
                                        ClassValue(world.class_of_value(rcv)))
        if selector == "new":
            if isinstance(rcv, ClassValue):
                obj = world.instantiate(rcv.name)
                return self._finish_builtin(frame, task, obj)
            return NOT_HANDLED
        if selector == "size":
            if isinstance(rcv, (list, str)):
                return self._finish_builtin(frame, task, len(rcv))
            return NOT_HANDLED
        if selector == "at:":
            if isinstance(rcv, (list, str)):
                index = args[0]
                if type(index) is not int or not 1 <= index <= len(rcv):
                    return self._builtin_error(task, "index out of bounds")
                return self._finish_builtin(frame, task, rcv[index - 1])
            return NOT_HANDLED
        if selector == "halt":
            task.meta["halted"] = True
            self.pause(PauseReason("haltInstruction"))
            return None
        if selector == "error:":
            message = args[0] if isinstance(args[0], str) else self.kernel.print_value(args[0])
            task.meta["errored"] = True
            self.pause(PauseReason("userError", message=message))
            return None
        if selector == "not":
            if type(rcv) is bool:
                return self._finish_builtin(frame, task, not rcv)
            return NOT_HANDLED
        if selector in ("ifTrue:ifFalse:", "ifTrue:", "ifFalse:"):
            return self._builtin_conditional(frame, task, selector, rcv, args)
        if selector in ("and:", "or:"):
            return self._builtin_short_circuit(frame, task, selector, rcv, args)
        if selector in ("value", "value:", "value:value:"):
            if isinstance(rcv, BlockClosure):
                return self._invoke_block(frame, task, rcv, args, counted=True)
            return NOT_HANDLED
        if selector == "whileTrue:":
            if isinstance(rcv, BlockClosure) and isinstance(args[0], BlockClosure):
                task.meta["bi"] = "while"
                task.meta["bi_phase"] = "start"
                return self._builtin_continue(frame, task)
            return NOT_HANDLED
        if selector == "to:do:":
            if type(rcv) is int and type(args[0]) is int and isinstance(args[1], BlockClosure):
                task.meta["bi"] = "to_do"
                task.meta["i"] = rcv
                return self._builtin_continue(frame, task)
            return NOT_HANDLED
        if selector == "do:":
            if isinstance(rcv, list) and isinstance(args[0], BlockClosure):
                task.meta["bi"] = "each"
                task.meta["i"] = 0
                return self._builtin_continue(frame, task)
            return NOT_HANDLED
        if selector in _TESTCASE_SELECTORS:
            if not self._is_test_case(rcv):
                return NOT_HANDLED
            return self._builtin_assertion(frame, task, selector, rcv, args)
        return NOT_HANDLED

    def _finish_builtin(self, frame, task, value):
        self._complete(frame, task, value)
        return ("send", len(self.frames))

    def _builtin_error(self, task, message):
        task.meta["errored"] = True
        self.pause(PauseReason("userError", message=message))
        return None

    def _is_test_case(self, value):
        return (isinstance(value, ObjectRef)
                and self.world.descends_from(value.class_ref, "TestCase"))

    def _invoke_block(self, frame, task, closure, args, counted=False):
        """Push a block activation; implicit invocations consume fuel here."""
        if len(args) != len(closure.params):
            return self._builtin_error(task, "wrong number of block arguments")
        if not counted and not self._consume_fuel():
            return None
        new_frame = self.push_block_frame(closure, args)
        task.meta["stage"] = "wait"
        return ("enter", len(self.frames), new_frame)

    def _builtin_conditional(self, frame, task, selector, rcv, args):
        if type(rcv) is not bool:
            return NOT_HANDLED
        if selector == "ifTrue:ifFalse:":
            chosen = args[0] if rcv else args[1]
        elif selector == "ifTrue:":
            chosen = args[0] if rcv else None
        else:
            chosen = args[0] if not rcv else None
        if isinstance(chosen, BlockClosure):
            return self._start_passthrough(frame, task, chosen)
        return self._finish_builtin(frame, task, chosen)

    def _builtin_short_circuit(self, frame, task, selector, rcv, args):
        if type(rcv) is not bool:
            return NOT_HANDLED
        decided = (rcv is False) if selector == "and:" else (rcv is True)
        if decided:
            return self._finish_builtin(frame, task, rcv)
        if isinstance(args[0], BlockClosure):
            return self._start_passthrough(frame, task, args[0])
        return self._finish_builtin(frame, task, args[0])

    def _start_passthrough(self, frame, task, closure):
        task.meta["bi"] = "passthrough"
        task.meta["bi_phase"] = "start"
        task.meta["block"] = closure
        return self._builtin_continue(frame, task)

    def _builtin_assertion(self, frame, task, selector, rcv, args):
        if selector == "try:":
            task.meta["try_done"] = True
            self.pause(PauseReason("tryAssertion", value=args[0],
                                   send_path=task.node.path,
                                   frame_id=frame.frame_id))
            return None
        if selector == "assert:":
            if args[0] is True:
                return self._finish_builtin(frame, task, rcv)
            return self._assertion_failed(task, True, args[0], "assertion failed")
        if selector == "deny:":
            if args[0] is False:
                return self._finish_builtin(frame, task, rcv)
            return self._assertion_failed(task, False, args[0], "denial failed")
        # assert:equals: sends a real = so user-defined equality participates
        task.meta["bi"] = "assert_equals"
        task.meta["expected"] = args[1]
        task.meta["actual"] = args[0]
        task.meta["stage"] = "wait"
        frame.tasks.append(synthetic_send(task.node, "=", args[0], [args[1]]))
        return None

    def _assertion_failed(self, task, expected, actual, message):
        self.failed_assertions += 1
        task.meta["assert_done"] = True
        self.pause(PauseReason("assertionFailure", expected=expected,
                               actual=actual, message=message))
        return None

    def _builtin_continue(self, frame, task):
        """Advance a multi-step built-in. Each phase decides from current
        state, attempts the next block invocation, and mutates only after
        the invocation succeeded, so a fuel pause can safely re-enter."""
        kind = task.meta["bi"]
        if kind == "passthrough":
            if task.meta["bi_phase"] == "start":
                event = self._invoke_block(frame, task, task.meta["block"], [])
                if event is None:
                    return None
                task.meta["bi_phase"] = "done"
                return event
            return self._finish_builtin(frame, task, task.values[-1])
        if kind == "assert_equals":
            outcome = task.values[-1]
            if outcome is True:
                return self._finish_builtin(frame, task, task.values[0])
            return self._assertion_failed(
                task, task.meta["expected"], task.meta["actual"],
                "assertion failed: values differ")
        if kind == "while":
            phase = task.meta["bi_phase"]
            if phase == "start":
                event = self._invoke_block(frame, task, task.values[0], [])
                if event is None:
                    return None
                task.meta["bi_phase"] = "cond"
                return event
            if phase == "cond":
                outcome = task.values[-1]
                if outcome is False:
                    return self._finish_builtin(frame, task, None)
                if outcome is not True:
                    return self._builtin_error(
                        task, "whileTrue: condition must be a boolean")
                event = self._invoke_block(frame, task, task.values[1], [])
                if event is None:
                    return None
                task.values.pop()
                task.meta["bi_phase"] = "body"
                return event
            event = self._invoke_block(frame, task, task.values[0], [])
            if event is None:
                return None
            task.values.pop()  # drop the discarded body result
            task.meta["bi_phase"] = "cond"
            return event
        if kind == "to_do":
            current = task.meta["i"]
            if current > task.values[1]:
                return self._finish_builtin(frame, task, task.values[0])
            event = self._invoke_block(frame, task, task.values[2], [current])
            if event is None:
                return None
            task.meta["i"] = current + 1
            if len(task.values) > 3:
                task.values.pop()
            return event
        if kind == "each":
            index = task.meta["i"]
            items = task.values[0]
            if index >= len(items):
                return self._finish_builtin(frame, task, items)
            event = self._invoke_block(frame, task, task.values[1], [items[index]])
            if event is None:
                return None
            task.meta["i"] = index + 1
            if len(task.values) > 2:
                task.values.pop()
            return event
        raise InterpreterError(f"unknown built-in continuation {kind!r}")


# -- value semantics -----------------------------------------------------------


def _literal_value(payload):
    if isinstance(payload, tuple):
        return [_literal_value(v) for v in payload]
    return payload


def value_equals(a, b):
    """Structural equality: literals by value, arrays elementwise, objects
    by identity (user-defined = participates via normal lookup instead)."""
    if type(a) is bool or type(b) is bool:
        return type(a) is type(b) and a == b
    if isinstance(a, int) and isinstance(b, int):
        return a == b
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    if isinstance(a, Symbol) and isinstance(b, Symbol):
        return a == b
    if a is None or b is None:
        return a is None and b is None
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(value_equals(x, y) for x, y in zip(a, b))
    if isinstance(a, ObjectRef) and isinstance(b, ObjectRef):
        return a.object_id == b.object_id
    if isinstance(a, ClassValue) and isinstance(b, ClassValue):
        return a.name == b.name
    if isinstance(a, BlockClosure) and isinstance(b, BlockClosure):
        return a is b
    return False


def identity_equals(a, b):
    if isinstance(a, ObjectRef) and isinstance(b, ObjectRef):
        return a.object_id == b.object_id
    if type(a) is bool or type(b) is bool:
        return type(a) is type(b) and a == b
    if isinstance(a, int) and isinstance(b, int):
        return a == b
    if isinstance(a, Symbol) and isinstance(b, Symbol):
        return a == b
    if a is None or b is None:
        return a is None and b is None
    return a is b


def predicate_matches(world, predicate, frame):
    """Evaluate a step predicate against a just-entered frame, effect-free.

    Only real method activations are considered; block and synthetic frames
    never match.
    """
    if frame.kind != Frame.METHOD:
        return False
    if predicate.kind == "selectorIs":
        return frame.method.selector == predicate.value
    if predicate.kind == "selectorMatches":
        return fnmatchcase(frame.method.selector, predicate.value)
    if predicate.kind == "receiverClassIs":
        return world.class_of_value(frame.receiver) == predicate.value
    if predicate.kind == "receiverIs":
        return (isinstance(frame.receiver, ObjectRef)
                and frame.receiver.object_id == predicate.value)
    raise InterpreterError(f"unknown predicate kind {predicate.kind!r}")
