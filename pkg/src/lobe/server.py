"""Line protocol front door: JSON requests in, responses and events out.

One JSON object per line, newline-terminated, UTF-8. Requests carry a
client-chosen id; every request gets exactly one response, in arrival order.
Pauses and deprecation warnings additionally surface as events (objects with
an "event" key and no id), interleaved on the same stream at the moment they
happen, before the triggering request's response. Error codes: -1 request
parse error (id null), -2 unknown method, -3 kernel error.
"""

import json
import selectors
import socket
import sys

from .interp import ContainedError
from .journal import JournalError
from .kernel import Kernel, KernelError
from .objspace import WorldError
from .parser import LobSyntaxError
from .rewrite import RewriteError

KERNEL_FAULTS = (KernelError, WorldError, JournalError, RewriteError,
                 LobSyntaxError, ContainedError)

PARSE_ERROR, UNKNOWN_METHOD, KERNEL_ERROR = -1, -2, -3


class RequestHandler:
    """Decodes request lines, runs kernel operations, frames the output."""

    def __init__(self, kernel=None):
        self.kernel = kernel or Kernel()
        self.stopping = False
        self._event_lines = []
        self.kernel.add_event_sink(self._on_event)

    def _on_event(self, event):
        self._event_lines.append(json.dumps(event))

    def handle_line(self, line):
        """All output lines this request produces: events first, then the
        one response."""
        line = line.strip()
        if not line:
            return []
        try:
            request = json.loads(line)
            if not isinstance(request, dict):
                raise ValueError("request is not an object")
        except ValueError as err:
            return [_error_line(None, PARSE_ERROR, f"bad request: {err}")]
        request_id = request.get("id")
        method = request.get("method")
        params = request.get("params") or {}
        handler = getattr(self, f"do_{method}", None) if isinstance(method, str) else None
        if handler is None:
            response = _error_line(request_id, UNKNOWN_METHOD,
                                   f"unknown method {method!r}")
            return self._drain() + [response]
        try:
            result = handler(params)
            response = json.dumps({"id": request_id, "result": result})
        except KERNEL_FAULTS as err:
            response = _error_line(request_id, KERNEL_ERROR, str(err))
        except (KeyError, TypeError, ValueError) as err:
            response = _error_line(request_id, KERNEL_ERROR,
                                   f"bad parameters: {err}")
        except Exception as err:  # a broken request must not kill the loop
            response = _error_line(request_id, KERNEL_ERROR,
                                   f"internal error: {err}")
        return self._drain() + [response]

    def _drain(self):
        lines = self._event_lines
        self._event_lines = []
        return lines

    # -- method handlers -------------------------------------------------------

    def do_loadFile(self, params):
        names = self.kernel.load_file(params["path"])
        return {"classes": names, "records": self.kernel.world.journal.latest_seq}

    def do_eval(self, params):
        outcome = self.kernel.evaluate(params["source"], fuel=params.get("fuel"))
        return self._run_outcome(outcome)

    def do_runTests(self, params):
        from .harness import summarize

        results = self.kernel.run_tests(
            filter_glob=params.get("filter"),
            auto_materialize=bool(params.get("autoMaterialize")))
        return {"results": [r.to_dict() for r in results],
                "summary": summarize(results)}

    def do_listClasses(self, params):
        return {"classes": self.kernel.list_classes()}

    def do_methodSource(self, params):
        return {"source": self.kernel.method_source(params["className"],
                                                    params["selector"])}

    def do_defineMethod(self, params):
        mdef = self.kernel.define_method(params["className"], params["source"])
        return {"selector": mdef.selector}

    def do_removeMethod(self, params):
        self.kernel.remove_method(params["className"], params["selector"])
        return {}

    def do_inspect(self, params):
        return self.kernel.inspect(params["objectId"])

    def do_viewContent(self, params):
        return self.kernel.view_content(params["objectId"], params["viewId"])

    def do_sessions(self, params):
        return {"sessions": self.kernel.list_sessions()}

    def do_stack(self, params):
        return {"frames": self.kernel.session_stack(params["sessionId"])}

    def do_step(self, params):
        outcome = self.kernel.step(params["sessionId"], params.get("mode", "into"))
        return self._run_outcome(outcome)

    def do_stepUntil(self, params):
        outcome = self.kernel.step_until(
            params["sessionId"], spec=params.get("spec"),
            command=params.get("command"),
            budget=params.get("budget", 100_000))
        return self._run_outcome(outcome)

    def do_resume(self, params):
        return self._run_outcome(self.kernel.resume(params["sessionId"]))

    def do_restartFrame(self, params):
        outcome = self.kernel.restart_frame(params["sessionId"], params["frameId"])
        return self._run_outcome(outcome)

    def do_createMissingMethod(self, params):
        outcome = self.kernel.create_missing_method(params["sessionId"],
                                                    params.get("body"))
        return self._run_outcome(outcome)

    def do_recompileFrameMethod(self, params):
        outcome = self.kernel.recompile_frame_method(
            params["sessionId"], params["frameId"], params["source"])
        return self._run_outcome(outcome)

    def do_materializeTry(self, params):
        outcome = self.kernel.materialize_try(params["sessionId"])
        return {"newTestSource": outcome["newTestSource"],
                "rerun": self._run_outcome(outcome["rerun"])}

    def do_setObjectBreakpoint(self, params):
        breakpoint_id = self.kernel.set_object_breakpoint(
            params["objectId"], params.get("selector"))
        return {"breakpointId": breakpoint_id}

    def do_clearBreakpoint(self, params):
        self.kernel.clear_breakpoint(params["breakpointId"])
        return {}

    def do_registerStepCommand(self, params):
        command = self.kernel.register_step_command(params["name"], params["spec"])
        return {"name": command.name}

    def do_listStepCommands(self, params):
        return {"commands": self.kernel.list_step_commands()}

    def do_sendersOf(self, params):
        senders = self.kernel.senders_of(params["selector"])
        for entry in senders:
            entry["sitePaths"] = [list(p) for p in entry["sitePaths"]]
        return {"senders": senders}

    def do_implementorsOf(self, params):
        found = self.kernel.implementors_of(params["selector"])
        return {"implementors": [{"className": m.owner, "selector": m.selector,
                                  "source": m.source_text} for m in found]}

    def do_journal(self, params):
        records = self.kernel.journal_slice(params.get("fromSeq", 1),
                                            params.get("toSeq"))
        return {"records": [r.to_dict() for r in records]}

    def do_rollbackTo(self, params):
        appended = self.kernel.rollback_to(params["seq"])
        return {"records": [r.to_dict() for r in appended]}

    def do_shutdown(self, params):
        self.stopping = True
        return {}

    def _run_outcome(self, outcome):
        """Protocol shape for an evaluation/step result."""
        if outcome.get("paused"):
            return {"paused": True, "sessionId": outcome["sessionId"]}
        if outcome.get("completed"):
            encoded = self.kernel.encode_value(outcome["value"])
            encoded["completed"] = True
            encoded["failedAssertions"] = outcome.get("failedAssertions", 0)
            return encoded
        return self.kernel.encode_value(outcome["value"])


def _error_line(request_id, code, message):
    return json.dumps({"id": request_id,
                       "error": {"code": code, "message": message}})


def serve_stdio(kernel=None, stdin=None, stdout=None):
    handler = RequestHandler(kernel)
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        for out in handler.handle_line(line):
            stdout.write(out + "\n")
        stdout.flush()
        if handler.stopping:
            break
    return 0


def serve_tcp(kernel, port, ready=None):
    """Serve one owning connection; refuse extra connections with an error
    line. The world outlives connections: when the owner disconnects a new
    owner may attach. Returns after a shutdown request."""
    handler = RequestHandler(kernel)
    listener = socket.create_server(("127.0.0.1", port))
    chosen = listener.getsockname()[1]
    print(f"LISTENING {chosen}", flush=True)
    if ready is not None:
        ready(chosen)
    selector = selectors.DefaultSelector()
    selector.register(listener, selectors.EVENT_READ, "accept")
    owner = None
    buffer = b""

    def drop_owner():
        nonlocal owner, buffer
        selector.unregister(owner)
        owner.close()
        owner = None
        buffer = b""

    try:
        while not handler.stopping:
            # handle owner data (and disconnects) before accept decisions so
            # a reconnect right after a close is not spuriously refused
            events = sorted(selector.select(), key=lambda kv: kv[0].data != "owner")
            for key, _mask in events:
                if handler.stopping:
                    break
                if key.data == "accept":
                    conn, _addr = listener.accept()
                    if owner is not None:
                        refusal = json.dumps({
                            "event": "error",
                            "message": "world already owned by another connection"})
                        try:
                            conn.sendall(refusal.encode() + b"\n")
                        finally:
                            conn.close()
                        continue
                    owner = conn
                    selector.register(owner, selectors.EVENT_READ, "owner")
                    continue
                chunk = owner.recv(65536)
                if not chunk:
                    drop_owner()
                    continue
                buffer += chunk
                while b"\n" in buffer and not handler.stopping:
                    raw, buffer = buffer.split(b"\n", 1)
                    out = "".join(s + "\n"
                                  for s in handler.handle_line(raw.decode("utf-8")))
                    if out:
                        owner.sendall(out.encode("utf-8"))
    finally:
        if owner is not None:
            selector.unregister(owner)
            owner.close()
        selector.close()
        listener.close()
    return 0
