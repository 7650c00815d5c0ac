"""Canonical source rendering for AST nodes.

Canonical form uses single spaces, one statement per line in method bodies
with '.' separators, and inline blocks. Parenthesization is driven by the
precedence ladder (unary > binary > keyword), so reparsing the output yields
a structurally equal tree.
"""

from .nodes import (
    AssignNode,
    BlockNode,
    LiteralNode,
    MetaVarNode,
    MethodNode,
    ReturnNode,
    SelfNode,
    SendNode,
    Symbol,
    VarReadNode,
    selector_kind,
)

_KEYWORD, _BINARY, _UNARY, _PRIMARY = 1, 2, 3, 4


def literal_text(value):
    if value is True:
        return "true"
    if value is False:
        return "false"
    if value is None:
        return "nil"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    if isinstance(value, Symbol):
        return "#" + value.name
    if isinstance(value, (tuple, list)):
        if not value:
            return "#( )"
        return "#( " + " ".join(literal_text(v) for v in value) + " )"
    raise TypeError(f"value has no literal form: {value!r}")


def _level(node):
    if isinstance(node, SendNode):
        kind = selector_kind(node.selector)
        return {"keyword": _KEYWORD, "binary": _BINARY, "unary": _UNARY}[kind]
    return _PRIMARY


def expr_text(node, min_level=_KEYWORD):
    text = _render(node)
    if _level(node) < min_level:
        return "(" + text + ")"
    return text


def _render(node):
    if isinstance(node, LiteralNode):
        return literal_text(node.value)
    if isinstance(node, VarReadNode):
        return node.name
    if isinstance(node, SelfNode):
        return "self"
    if isinstance(node, MetaVarNode):
        return "@" + node.name
    if isinstance(node, BlockNode):
        head = "".join(f":{p} " for p in node.params)
        if node.params:
            head += "| "
        body = ". ".join(statement_text(s) for s in node.body)
        inner = (head + body).strip()
        return "[ " + inner + " ]" if inner else "[ ]"
    if isinstance(node, SendNode):
        kind = selector_kind(node.selector)
        if kind == "unary":
            return expr_text(node.receiver, _UNARY) + " " + node.selector
        if kind == "binary":
            return (expr_text(node.receiver, _BINARY) + " " + node.selector
                    + " " + expr_text(node.args[0], _UNARY))
        parts = [p + ":" for p in node.selector.split(":")[:-1]]
        pieces = [expr_text(node.receiver, _BINARY)]
        for part, arg in zip(parts, node.args):
            pieces.append(part)
            pieces.append(expr_text(arg, _BINARY))
        return " ".join(pieces)
    if isinstance(node, (ReturnNode, AssignNode)):
        return statement_text(node)
    raise TypeError(f"cannot render node {node!r}")


def statement_text(stmt):
    if isinstance(stmt, ReturnNode):
        return "^ " + expr_text(stmt.expr)
    if isinstance(stmt, AssignNode):
        return stmt.name + " := " + expr_text(stmt.expr)
    return expr_text(stmt)


def pragma_text(pragma):
    if not pragma.selector.endswith(":"):
        return "<" + pragma.selector + ">"
    parts = [p + ":" for p in pragma.selector.split(":")[:-1]]
    pieces = []
    for part, arg in zip(parts, pragma.args):
        pieces.append(part)
        pieces.append(literal_text(arg))
    return "<" + " ".join(pieces) + ">"


def method_header(method):
    if not method.params:
        head = method.selector
    elif selector_kind(method.selector) == "binary":
        head = f"{method.selector} {method.params[0]}"
    else:
        parts = [p + ":" for p in method.selector.split(":")[:-1]]
        head = " ".join(f"{part} {param}" for part, param in zip(parts, method.params))
    for pragma in method.pragmas:
        head += " " + pragma_text(pragma)
    return head


def unparse_method(method):
    lines = [method_header(method) + " ["]
    if method.temps:
        lines.append("    | " + " ".join(method.temps) + " |")
    for i, stmt in enumerate(method.body):
        sep = "." if i < len(method.body) - 1 else ""
        lines.append("    " + statement_text(stmt) + sep)
    lines.append("]")
    return "\n".join(lines)


def class_shell(name, super_name, field_names):
    text = f"class {name} extends {super_name or 'Object'} ["
    if field_names:
        text += " | " + " ".join(field_names) + " |"
    return text + " ]"


def unparse_class(decl):
    extends = f" extends {decl.super_name}" if decl.super_name else ""
    lines = [f"class {decl.name}{extends} ["]
    if decl.fields:
        lines.append("    | " + " ".join(decl.fields) + " |")
    for method in decl.methods:
        body = unparse_method(method)
        lines.extend("    " + line for line in body.split("\n"))
    lines.append("]")
    return "\n".join(lines)


def unparse(node):
    """Render a method or expression node back to canonical source."""
    if isinstance(node, MethodNode):
        return unparse_method(node)
    return statement_text(node)
