import json
import socket
import subprocess
import sys
import threading
import time

import pytest

from lobe.kernel import Kernel
from lobe.server import RequestHandler, serve_tcp

from conftest import fixture_path


def drive(handler, requests):
    """Feed requests in order; collect (responses_by_id, events, all_lines)."""
    responses = {}
    events = []
    transcript = []
    for request in requests:
        for line in handler.handle_line(json.dumps(request)):
            transcript.append(line)
            decoded = json.loads(line)
            if "event" in decoded:
                events.append(decoded)
            else:
                assert decoded["id"] not in responses, "duplicate response id"
                responses[decoded["id"]] = decoded
    return responses, events, transcript


def test_eval_roundtrip():
    handler = RequestHandler(Kernel())
    responses, events, _ = drive(handler, [
        {"id": 1, "method": "eval", "params": {"source": "3 + 4"}}])
    assert responses[1]["result"]["value"] == "7"
    assert responses[1]["result"]["kind"] == "int"


def test_unknown_method_and_parse_error():
    handler = RequestHandler(Kernel())
    out = handler.handle_line('{"id":3,"method":"nope"}')
    decoded = json.loads(out[-1])
    assert decoded["error"]["code"] == -2
    bad = handler.handle_line("this is not json")
    decoded = json.loads(bad[0])
    assert decoded["id"] is None
    assert decoded["error"]["code"] == -1


def test_kernel_error_mapped():
    handler = RequestHandler(Kernel())
    responses, _, _ = drive(handler, [
        {"id": 9, "method": "stack", "params": {"sessionId": 123}}])
    assert responses[9]["error"]["code"] == -3


def test_eval_pause_emits_event_before_response():
    handler = RequestHandler(Kernel())
    out = handler.handle_line(json.dumps(
        {"id": 2, "method": "eval", "params": {"source": "self halt"}}))
    first, last = json.loads(out[0]), json.loads(out[-1])
    assert first["event"] == "paused"
    assert first["reason"]["kind"] == "haltInstruction"
    assert last["id"] == 2
    assert last["result"] == {"paused": True, "sessionId": 1}


def test_golden_transcript_thirty_pipelined_requests():
    handler = RequestHandler(Kernel())
    requests = [
        {"id": 1, "method": "eval", "params": {"source": "3 + 4"}},
        {"id": 2, "method": "loadFile", "params": {"path": fixture_path("logistics.lob")}},
        {"id": 3, "method": "listClasses", "params": {}},
        {"id": 4, "method": "runTests", "params": {}},
        {"id": 5, "method": "sessions", "params": {}},
        {"id": 6, "method": "stack", "params": {"sessionId": 1}},
        {"id": 7, "method": "createMissingMethod",
         "params": {"sessionId": 1, "body": "^ self addDelivery: p1 on: p2"}},
        {"id": 8, "method": "stack", "params": {"sessionId": 1}},
        {"id": 9, "method": "resume", "params": {"sessionId": 1}},
        {"id": 10, "method": "runTests", "params": {}},
        {"id": 11, "method": "methodSource",
         "params": {"className": "RoutePlan", "selector": "schedulePackage:for:"}},
        {"id": 12, "method": "implementorsOf", "params": {"selector": "schedulePackage:for:"}},
        {"id": 13, "method": "sendersOf", "params": {"selector": "addDelivery:on:"}},
        {"id": 14, "method": "journal", "params": {}},
        {"id": 15, "method": "eval", "params": {"source": "self halt. 1 + 1"}},
        {"id": 16, "method": "step", "params": {"sessionId": 2, "mode": "over"}},
        {"id": 17, "method": "resume", "params": {"sessionId": 2}},
        {"id": 18, "method": "eval", "params": {"source": "Depot new"}},
        {"id": 19, "method": "inspect", "params": {"objectId": "FROM_18"}},
        {"id": 20, "method": "registerStepCommand",
         "params": {"name": "to-scheduling",
                    "spec": {"kind": "selectorIs", "value": "schedulePackage:for:"}}},
        {"id": 21, "method": "listStepCommands", "params": {}},
        {"id": 22, "method": "eval",
         "params": {"source": "self halt. RoutePlan new schedulePackage: nil for: nil"}},
        {"id": 23, "method": "stepUntil",
         "params": {"sessionId": 3, "command": "to-scheduling"}},
        {"id": 24, "method": "resume", "params": {"sessionId": 3}},
        {"id": 25, "method": "defineMethod",
         "params": {"className": "Depot", "source": "ping [ ^ 'pong' ]"}},
        {"id": 26, "method": "eval", "params": {"source": "Depot new ping"}},
        {"id": 27, "method": "removeMethod",
         "params": {"className": "Depot", "selector": "ping"}},
        {"id": 28, "method": "rollbackTo", "params": {"seq": 13}},
        {"id": 29, "method": "journal", "params": {"fromSeq": 14}},
        {"id": 30, "method": "shutdown", "params": {}},
    ]
    transcript = []
    depot_id = None
    for request in requests:
        if request["id"] == 19:
            request["params"]["objectId"] = depot_id
        for line in handler.handle_line(json.dumps(request)):
            transcript.append(line)
            decoded_line = json.loads(line)
            if decoded_line.get("id") == 18:
                depot_id = decoded_line["result"]["objectId"]
    decoded = [json.loads(line) for line in transcript]
    responses = [d for d in decoded if "event" not in d]
    events = [d for d in decoded if "event" in d]

    # one response per id, in request order
    assert [r["id"] for r in responses] == [r["id"] for r in requests]
    assert all(("result" in r) != ("error" in r) for r in responses)

    # spot checks along the flow
    by_id = {r["id"]: r for r in responses}
    assert by_id[1]["result"]["value"] == "7"
    assert by_id[2]["result"]["records"] == 13
    run1 = by_id[4]["result"]
    assert run1["summary"] == {"run": 2, "failed": 0, "errors": 1}
    assert by_id[7]["result"] == {"paused": True, "sessionId": 1}
    assert by_id[9]["result"]["completed"] is True
    run2 = by_id[10]["result"]
    assert run2["summary"]["errors"] == 0 and run2["summary"]["failed"] == 0
    assert by_id[12]["result"]["implementors"][0]["className"] == "RoutePlan"
    assert by_id[19]["result"]["className"] == "Depot"
    assert by_id[23]["result"] == {"paused": True, "sessionId": 3}
    assert by_id[26]["result"]["value"] == "'pong'"
    assert handler.stopping

    # events: every pause produced one, interleaved before its response
    paused_events = [e for e in events if e["event"] == "paused"]
    assert len(paused_events) >= 4
    positions = {id(d): i for i, d in enumerate(decoded)}
    mnu_event = next(e for e in paused_events
                     if e["reason"]["kind"] == "messageNotUnderstood")
    run_response = by_id[4]
    assert positions[id(mnu_event)] < positions[id(run_response)]


def test_stepuntil_halts_at_entry_via_protocol():
    handler = RequestHandler(Kernel())
    responses, events, _ = drive(handler, [
        {"id": 1, "method": "loadFile", "params": {"path": fixture_path("strategies.lob")}},
        {"id": 2, "method": "eval",
         "params": {"source": "| s | s := Scheduler new. s mode: 2. s halt. s route: nil"}},
        {"id": 3, "method": "stepUntil",
         "params": {"sessionId": 1,
                    "spec": {"kind": "selectorIs", "value": "schedulePackage:for:"}}},
        {"id": 4, "method": "stack", "params": {"sessionId": 1}},
    ])
    top = responses[4]["result"]["frames"][0]
    assert top["className"] == "LazyStrategy"
    assert top["selector"] == "schedulePackage:for:"


def test_protocol_covers_every_kernel_operation():
    """Exhaustiveness table: each kernel surface has a protocol method."""
    expected = [
        "loadFile", "eval", "runTests", "listClasses", "methodSource",
        "defineMethod", "removeMethod", "inspect", "viewContent", "sessions",
        "stack", "step", "stepUntil", "resume", "restartFrame",
        "createMissingMethod", "recompileFrameMethod", "materializeTry",
        "setObjectBreakpoint", "clearBreakpoint", "registerStepCommand",
        "listStepCommands", "sendersOf", "implementorsOf", "journal",
        "rollbackTo", "shutdown",
    ]
    for method in expected:
        assert hasattr(RequestHandler, f"do_{method}"), method
    implemented = {name[3:] for name in dir(RequestHandler)
                   if name.startswith("do_")}
    assert implemented == set(expected)


def test_handler_survives_garbage_and_bad_params():
    import random
    import string

    handler = RequestHandler(Kernel())
    rng = random.Random(8)
    for index in range(200):
        roll = rng.random()
        if roll < 0.3:
            junk = "".join(rng.choices(string.printable, k=rng.randrange(0, 40)))
            out = handler.handle_line(junk)
        elif roll < 0.6:
            out = handler.handle_line(json.dumps(
                {"id": index, "method": rng.choice(
                    ["eval", "stack", "inspect", "rollbackTo", "step"]),
                 "params": {}}))
        else:
            out = handler.handle_line(json.dumps(
                {"id": index, "method": "eval",
                 "params": {"source": rng.choice(["(", "1 +", "]", "<"])}}))
        for line in out:
            decoded = json.loads(line)
            assert "error" in decoded or "result" in decoded or "event" in decoded
    # the handler is still alive and sane
    ok = handler.handle_line(json.dumps(
        {"id": 999, "method": "eval", "params": {"source": "1 + 1"}}))
    assert json.loads(ok[-1])["result"]["value"] == "2"


def test_class_with_bad_pragma_installs_nothing():
    kernel = Kernel()
    before = kernel.world.digest()
    handler = RequestHandler(kernel)
    out = handler.handle_line(json.dumps({
        "id": 1, "method": "eval", "params": {"source": "1"}}))
    source = ("class Bad [ good [ ^ 1 ] old "
              "<deprecated: 'x' rewriteFrom: '@r mismatch' rewriteTo: '@r new'> "
              "[ ^ nil ] ]")
    try:
        kernel.load_source(source)
        raise AssertionError("expected a pragma validation error")
    except Exception:
        pass
    assert kernel.world.digest() == before  # nothing half-installed
    assert not kernel.world.has_class("Bad")


def test_lobe_fuel_environment_override(monkeypatch):
    monkeypatch.setenv("LOBE_FUEL", "50")
    kernel = Kernel()
    assert kernel.default_fuel == 50
    outcome = kernel.evaluate("[ true ] whileTrue: [ ]")
    assert outcome["session"].reason.kind == "fuelExhausted"
    assert outcome["session"].execution.sends_used == 50


def test_stdio_subprocess_roundtrip():
    script = "\n".join([
        json.dumps({"id": 1, "method": "eval", "params": {"source": "2 + 2"}}),
        json.dumps({"id": 2, "method": "shutdown", "params": {}}),
    ]) + "\n"
    proc = subprocess.run(
        [sys.executable, "-m", "lobe.cli", "serve", "--stdio"],
        input=script, capture_output=True, text=True, timeout=30)
    assert proc.returncode == 0
    lines = [json.loads(l) for l in proc.stdout.strip().splitlines()]
    assert lines[0] == {"id": 1, "result": {"value": "4", "kind": "int"}}
    assert lines[1] == {"id": 2, "result": {}}


def test_tcp_second_connection_refused():
    kernel = Kernel()
    port_holder = {}
    ready = threading.Event()

    def run():
        serve_tcp(kernel, 0, ready=lambda p: (port_holder.update(port=p),
                                              ready.set()))

    thread = threading.Thread(target=run, daemon=True)
    thread.start()
    assert ready.wait(5)
    port = port_holder["port"]
    owner = socket.create_connection(("127.0.0.1", port))
    owner_file = owner.makefile("rw", encoding="utf-8")
    try:
        second = socket.create_connection(("127.0.0.1", port))
        refusal = second.makefile("r", encoding="utf-8").readline()
        assert "already owned" in refusal
        second.close()

        owner_file.write(json.dumps(
            {"id": 1, "method": "eval", "params": {"source": "1 + 1"}}) + "\n")
        owner_file.flush()
        response = json.loads(owner_file.readline())
        assert response["result"]["value"] == "2"
        owner_file.write(json.dumps({"id": 2, "method": "shutdown"}) + "\n")
        owner_file.flush()
        assert json.loads(owner_file.readline())["id"] == 2
    finally:
        owner.close()
        thread.join(timeout=5)
    assert not thread.is_alive()
