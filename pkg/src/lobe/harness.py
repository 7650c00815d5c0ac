"""Test discovery and execution with debugger integration.

Tests are the unary test* methods on TestCase subclasses. A failing test does
not just report: it leaves an open debug session paused at the failure, so
the missing code can be written in place and the run resumed. Pending
try-assertions can be materialized into literal assertions from the captured
run-time value.
"""

import copy
import time
from fnmatch import fnmatchcase

from .interp import DONE, Execution
from .nodes import SendNode, assign_paths, node_at
from .parser import parse_expression, parse_statements
from .rewrite import _replace_node
from .unparse import literal_text, unparse_method


class TestResult:
    __slots__ = ("class_name", "selector", "outcome", "session_id", "duration_ms")

    def __init__(self, class_name, selector, outcome, session_id, duration_ms):
        self.class_name = class_name
        self.selector = selector
        self.outcome = outcome  # pass | fail | error
        self.session_id = session_id
        self.duration_ms = duration_ms

    def to_dict(self):
        return {
            "className": self.class_name,
            "selector": self.selector,
            "outcome": self.outcome,
            "sessionId": self.session_id,
            "durationMs": self.duration_ms,
        }


def discover_tests(world, filter_glob=None):
    """(class, selector) pairs in deterministic order: class name, selector."""
    found = []
    for name in sorted(world.classes):
        cref = world.classes[name]
        if cref.builtin or not world.descends_from(cref, "TestCase"):
            continue
        selectors = set()
        for klass in world.chain(cref):
            for selector in klass.method_dict:
                if selector.startswith("test") and ":" not in selector:
                    selectors.add(selector)
        for selector in sorted(selectors):
            if filter_glob and not _matches_filter(filter_glob, name, selector):
                continue
            found.append((name, selector))
    return found


def _matches_filter(glob, class_name, selector):
    return (fnmatchcase(class_name, glob) or fnmatchcase(selector, glob)
            or fnmatchcase(f"{class_name}>>{selector}", glob))


def run_tests(kernel, filter_glob=None, auto_materialize=False):
    """Run matching tests, each on a fresh instance. Failures and errors
    leave their sessions open for interactive repair."""
    results = []
    for class_name, selector in discover_tests(kernel.world, filter_glob):
        receiver = kernel.world.instantiate(class_name)
        _temps, statements = parse_statements(f"self {selector}")
        execution = Execution(kernel)
        execution.push_top_frame(statements, receiver=receiver)
        started = time.perf_counter()
        execution.run()
        label = f"{class_name}>>{selector}"
        if (execution.state != DONE and auto_materialize
                and execution.reason.kind == "tryAssertion"):
            session = kernel.open_session(execution, label=label)
            outcome_info = materialize_try(kernel, session.session_id)
            duration = (time.perf_counter() - started) * 1000.0
            rerun = outcome_info["rerun"]
            outcome = "pass" if rerun.get("completed") and not rerun.get(
                "failedAssertions") else "fail"
            session_id = None if rerun.get("completed") else session.session_id
            results.append(TestResult(class_name, selector, outcome, session_id, duration))
            continue
        duration = (time.perf_counter() - started) * 1000.0
        if execution.state == DONE:
            outcome = "pass" if execution.failed_assertions == 0 else "fail"
            results.append(TestResult(class_name, selector, outcome, None, duration))
        else:
            session = kernel.open_session(execution, label=label)
            kind = execution.reason.kind
            outcome = "fail" if kind in ("assertionFailure", "tryAssertion") else "error"
            results.append(TestResult(class_name, selector, outcome,
                                      session.session_id, duration))
    return results


def summarize(results):
    failed = sum(1 for r in results if r.outcome == "fail")
    errors = sum(1 for r in results if r.outcome == "error")
    return {"run": len(results), "failed": failed, "errors": errors}


def literal_for(value):
    """Literal source for a value, or None when it has no literal form."""
    try:
        return literal_text(value)
    except TypeError:
        return None


def materialize_try(kernel, session_id):
    """Turn the paused try-assertion into assert:equals: with the captured
    value frozen as a literal, recompile, restart the test frame and rerun."""
    from .kernel import KernelError

    session = kernel.open_session_named(session_id)
    execution = session.execution
    reason = execution.reason
    if reason is None or reason.kind != "tryAssertion":
        raise KernelError("session is not paused on a try assertion")
    literal = literal_for(reason.value)
    if literal is None:
        raise KernelError("captured value has no literal form; nothing rewritten")
    _index, frame = execution.find_frame(reason.frame_id)
    if frame is None or frame.method is None:
        raise KernelError("the try assertion's frame is gone")
    owner = frame.method.owner
    installed = kernel.world.class_named(owner).method_dict.get(frame.method.selector)
    if installed is None:
        raise KernelError(f"{owner} no longer defines {frame.method.selector!r}")
    method = copy.deepcopy(installed.node)
    assign_paths(method)
    site = node_at(method, tuple(reason.send_path))
    if not isinstance(site, SendNode) or site.selector != "try:":
        raise KernelError("no try: send at the recorded path")
    replacement = SendNode(site.receiver, "assert:equals:",
                           [site.args[0], parse_expression(literal)])
    _replace_node(method, tuple(reason.send_path), replacement)
    assign_paths(method)
    new_source = unparse_method(method)
    kernel.world.define_method(owner, new_source, origin="tryMaterialization")
    kernel.restart_frame(session_id, frame.frame_id)
    rerun = kernel.resume(session_id)
    return {"newTestSource": new_source, "rerun": rerun}
