"""Independent reference evaluator for the pure expression subset.

A deliberately boring recursive interpreter used as an oracle: no frames, no
pausing, no world. It covers literals, temps, assignment, blocks and the
arithmetic/comparison/control built-ins, which is enough to cross-check the
kernel on pure programs. Kept outside the package on purpose.
"""

from lobe.nodes import (
    AssignNode,
    BlockNode,
    LiteralNode,
    ReturnNode,
    SendNode,
    VarReadNode,
)
from lobe.parser import parse_statements


class RefError(Exception):
    pass


class _TopReturn(Exception):
    def __init__(self, value):
        self.value = value


class RefEnv:
    def __init__(self, parent=None):
        self.names = {}
        self.parent = parent

    def lookup(self, name):
        env = self
        while env is not None:
            if name in env.names:
                return env.names[name]
            env = env.parent
        raise RefError(f"unknown variable {name!r}")

    def assign(self, name, value):
        env = self
        while env is not None:
            if name in env.names:
                env.names[name] = value
                return
            env = env.parent
        self.names[name] = value


class RefBlock:
    def __init__(self, node, env):
        self.node = node
        self.env = env

    def invoke(self, args):
        if len(args) != len(self.node.params):
            raise RefError("block arity mismatch")
        env = RefEnv(self.env)
        for name, value in zip(self.node.params, args):
            env.names[name] = value
        result = None
        for stmt in self.node.body:
            result = ref_eval(stmt, env)
        return result


def ref_run(source):
    """Evaluate a statement sequence; the value of the last statement."""
    temps, statements = parse_statements(source)
    env = RefEnv()
    for name in temps:
        env.names[name] = None
    result = None
    try:
        for stmt in statements:
            result = ref_eval(stmt, env)
    except _TopReturn as ret:
        return ret.value
    return result


def ref_eval(node, env):
    if isinstance(node, LiteralNode):
        return _literal(node.value)
    if isinstance(node, VarReadNode):
        return env.lookup(node.name)
    if isinstance(node, AssignNode):
        value = ref_eval(node.expr, env)
        env.assign(node.name, value)
        return value
    if isinstance(node, ReturnNode):
        raise _TopReturn(ref_eval(node.expr, env))
    if isinstance(node, BlockNode):
        return RefBlock(node, env)
    if isinstance(node, SendNode):
        return _send(node, env)
    raise RefError(f"node not in the pure subset: {node!r}")


def _literal(payload):
    if isinstance(payload, tuple):
        return [_literal(v) for v in payload]
    return payload


def _send(node, env):
    selector = node.selector
    receiver = ref_eval(node.receiver, env)

    if selector == "whileTrue:":
        body = ref_eval(node.args[0], env)
        while True:
            outcome = receiver.invoke([])
            if outcome is False:
                return None
            if outcome is not True:
                raise RefError("non-boolean while condition")
            body.invoke([])

    if selector in ("and:", "or:"):
        if type(receiver) is not bool:
            raise RefError("non-boolean receiver")
        decided = receiver is False if selector == "and:" else receiver is True
        if decided:
            return receiver
        arg = ref_eval(node.args[0], env)
        return arg.invoke([]) if isinstance(arg, RefBlock) else arg

    if selector in ("ifTrue:ifFalse:", "ifTrue:", "ifFalse:"):
        if type(receiver) is not bool:
            raise RefError("non-boolean receiver")
        if selector == "ifTrue:ifFalse:":
            chosen = node.args[0] if receiver else node.args[1]
        elif selector == "ifTrue:":
            chosen = node.args[0] if receiver else None
        else:
            chosen = node.args[0] if not receiver else None
        if chosen is None:
            return None
        value = ref_eval(chosen, env)
        return value.invoke([]) if isinstance(value, RefBlock) else value

    args = [ref_eval(a, env) for a in node.args]

    if selector in ("+", "-", "*", "/"):
        a, b = receiver, args[0]
        if type(a) is not int or type(b) is not int:
            raise RefError("non-integer arithmetic")
        if selector == "/" and b == 0:
            raise RefError("division by zero")
        return {"+": a + b, "-": a - b, "*": a * b, "/": a // b if b else 0}[selector]
    if selector in ("<", "<=", ">", ">="):
        a, b = receiver, args[0]
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[selector]
    if selector == "=":
        return _equals(receiver, args[0])
    if selector == "==":
        return _equals(receiver, args[0])  # pure subset: no heap identity
    if selector == ",":
        return receiver + args[0]
    if selector == "not":
        if type(receiver) is not bool:
            raise RefError("non-boolean receiver")
        return not receiver
    if selector == "size":
        return len(receiver)
    if selector == "at:":
        return receiver[args[0] - 1]
    if selector in ("value", "value:", "value:value:"):
        return receiver.invoke(args)
    if selector == "to:do:":
        for i in range(receiver, args[0] + 1):
            args[1].invoke([i])
        return receiver
    if selector == "do:":
        for element in receiver:
            args[0].invoke([element])
        return receiver
    raise RefError(f"selector not in the pure subset: {selector!r}")


def _equals(a, b):
    if type(a) is bool or type(b) is bool:
        return type(a) is type(b) and a == b
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(_equals(x, y) for x, y in zip(a, b))
    if type(a) is not type(b):
        return False
    return a == b
