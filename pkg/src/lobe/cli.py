"""The lobe command line: run programs, run tests, serve the protocol, REPL.

Exit codes: 0 success, 1 test failures or a run that ended paused,
2 usage or syntax errors.
"""

import argparse
import sys

from .harness import summarize
from .kernel import Kernel, KernelError
from .objspace import WorldError
from .parser import LobSyntaxError
from .server import serve_stdio, serve_tcp

LOAD_FAULTS = (KernelError, WorldError, LobSyntaxError)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lobe",
        description="Live object environment kernel for .lob programs.")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="load files and evaluate an expression")
    run.add_argument("files", nargs="*", help=".lob source files")
    run.add_argument("-e", "--eval", dest="expr", help="expression to evaluate")
    run.add_argument("--export-journal", metavar="PATH",
                     help="write the change journal to PATH on exit")

    test = commands.add_parser("test", help="run tests with debugger-style failures")
    test.add_argument("files", nargs="+", help=".lob source files")
    test.add_argument("--filter", help="class/selector glob")
    test.add_argument("--auto-materialize", action="store_true",
                      help="turn try: assertions into literal assertions without pausing")
    test.add_argument("--export-journal", metavar="PATH")

    serve = commands.add_parser("serve", help="speak the line protocol")
    serve.add_argument("files", nargs="*", help=".lob source files to preload")
    group = serve.add_mutually_exclusive_group()
    group.add_argument("--port", type=int, help="listen on TCP (0 = pick a port)")
    group.add_argument("--stdio", action="store_true",
                       help="serve on standard input/output (default)")

    repl = commands.add_parser("repl", help="interactive read-eval-print loop")
    repl.add_argument("files", nargs="*", help=".lob source files to preload")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    kernel = Kernel()
    try:
        for path in args.files:
            kernel.load_file(path)
    except LOAD_FAULTS as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    if args.command == "run":
        return _run(kernel, args)
    if args.command == "test":
        return _test(kernel, args)
    if args.command == "serve":
        if args.port is not None:
            return serve_tcp(kernel, args.port)
        return serve_stdio(kernel)
    if args.command == "repl":
        return _repl(kernel)
    return 2


def _print_deprecations(kernel):
    def sink(event):
        if event.get("event") == "deprecation":
            state = "rewritten" if event["rewritten"] else "not rewritten"
            print(f"deprecation: {event['selector']} called from "
                  f"{event['caller']} ({state}): {event['message']}")

    kernel.add_event_sink(sink)


def _export_journal(kernel, path):
    if not path:
        return
    with open(path, "w", encoding="utf-8") as handle:
        for line in kernel.world.journal.export_lines():
            handle.write(line + "\n")


def _run(kernel, args):
    _print_deprecations(kernel)
    code = 0
    if args.expr:
        try:
            outcome = kernel.evaluate(args.expr)
        except LOAD_FAULTS as err:
            print(f"error: {err}", file=sys.stderr)
            return 2
        if outcome.get("paused"):
            _print_pause(kernel, outcome["sessionId"])
            code = 1
        else:
            print(kernel.print_value(outcome["value"]))
    _export_journal(kernel, args.export_journal)
    return code


def _test(kernel, args):
    _print_deprecations(kernel)
    results = kernel.run_tests(filter_glob=args.filter,
                               auto_materialize=args.auto_materialize)
    for result in results:
        line = f"{result.outcome:5} {result.class_name}>>{result.selector}"
        if result.session_id is not None:
            line += f" [session {result.session_id}]"
        print(line)
    summary = summarize(results)
    print(f"{summary['run']} run, {summary['failed']} failed, "
          f"{summary['errors']} errors")
    _export_journal(kernel, args.export_journal)
    return 0 if summary["failed"] == 0 and summary["errors"] == 0 else 1


def _print_pause(kernel, session_id):
    session = kernel.session(session_id)
    reason = session.reason
    print(f"PAUSED [{session_id}] {reason.kind}: {reason.describe()}")
    for row in kernel.session_stack(session_id):
        print(f"  {_frame_line(row)}")


def _frame_line(row):
    where = f"{row['className']}>>{row['selector']}" if row["className"] else row["selector"]
    return f"#{row['frameId']} {where} (line {row['line']}) receiver={row['receiver']}"


def _repl(kernel):
    _print_deprecations(kernel)
    print("lobe repl; empty line or 'quit' to leave")
    while True:
        try:
            line = input("lobe> ")
        except EOFError:
            print()
            return 0
        line = line.strip()
        if line in ("quit", "exit"):
            return 0
        if not line:
            continue
        if line.startswith("journal export "):
            _export_journal(kernel, line.split(None, 2)[2])
            print("journal exported")
            continue
        try:
            outcome = kernel.evaluate(line)
        except LOAD_FAULTS as err:
            print(f"error: {err}")
            continue
        if outcome.get("paused"):
            _debug_prompt(kernel, outcome["sessionId"])
        else:
            print(kernel.print_value(outcome["value"]))


def _debug_prompt(kernel, session_id):
    _print_pause(kernel, session_id)
    while True:
        try:
            line = input(f"debug[{session_id}]> ")
        except EOFError:
            print()
            return
        words = line.strip().split(None, 1)
        if not words:
            continue
        command = words[0]
        rest = words[1] if len(words) > 1 else None
        try:
            if command == "stack":
                for row in kernel.session_stack(session_id):
                    print(f"  {_frame_line(row)}")
            elif command in ("step", "over"):
                outcome = kernel.step(session_id,
                                      "over" if command == "over" else "into")
                if _report_outcome(kernel, session_id, outcome):
                    return
            elif command == "until":
                if not rest:
                    print("usage: until SELECTOR")
                    continue
                outcome = kernel.step_until(
                    session_id, spec={"kind": "selectorIs", "value": rest})
                if _report_outcome(kernel, session_id, outcome):
                    return
            elif command == "resume":
                outcome = kernel.resume(session_id)
                if _report_outcome(kernel, session_id, outcome):
                    return
            elif command == "create":
                outcome = kernel.create_missing_method(session_id, rest)
                print(f"installed:\n{outcome['source']}")
            elif command == "leave":
                return
            else:
                print("commands: stack, step, over, until SELECTOR, resume, "
                      "create [BODY], leave")
        except LOAD_FAULTS as err:
            print(f"error: {err}")


def _report_outcome(kernel, session_id, outcome):
    """Print a step/resume outcome; True when the session finished."""
    if outcome.get("completed"):
        print(f"completed: {kernel.print_value(outcome['value'])}")
        return True
    reason = outcome["reason"]
    print(f"paused {reason['kind']}" + (
        f": {reason.get('message', '')}" if reason.get("message") else ""))
    top = outcome.get("topFrame")
    if top:
        print(f"  {_frame_line(top)}")
    return False


if __name__ == "__main__":
    sys.exit(main())
