"""AST node types for the .lob object language.

Nodes compare structurally: positions and paths are bookkeeping attributes,
not dataclass fields, so two parses of equivalent source are equal even when
they come from differently formatted text.
"""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Symbol:
    """Interned-name literal (#foo). Distinct from strings on purpose."""

    name: str

    def __repr__(self):
        return f"#{self.name}"


class Expr:
    """Base for expression and statement nodes."""

    # Positions and node addresses are assigned after construction; the class
    # attributes act as defaults so unannotated nodes stay usable.
    line = 0
    col = 0
    path: tuple = ()

    def at(self, line, col):
        self.line = line
        self.col = col
        return self


@dataclass(eq=True)
class LiteralNode(Expr):
    # int | str | Symbol | bool | None | tuple (literal array, recursively)
    value: object


@dataclass(eq=True)
class VarReadNode(Expr):
    name: str


@dataclass(eq=True)
class SelfNode(Expr):
    pass


@dataclass(eq=True)
class AssignNode(Expr):
    name: str
    expr: Expr


@dataclass(eq=True)
class SendNode(Expr):
    receiver: Expr
    selector: str
    args: list


@dataclass(eq=True)
class BlockNode(Expr):
    params: list
    temps: list
    body: list


@dataclass(eq=True)
class ReturnNode(Expr):
    expr: Expr


@dataclass(eq=True)
class MetaVarNode(Expr):
    """Pattern placeholder (@name); legal only in pattern-mode parses."""

    name: str


@dataclass(eq=True)
class Pragma:
    selector: str
    args: list
    line = 0
    col = 0


@dataclass(eq=True)
class MethodNode:
    selector: str
    params: list
    pragmas: list
    temps: list
    body: list

    line = 0
    col = 0
    source_text = ""


@dataclass(eq=True)
class ClassDecl:
    name: str
    super_name: object  # str or None (None means the root class Object)
    fields: list
    methods: list

    line = 0
    col = 0


def children(node):
    """Ordered sub-nodes used for node addressing and tree walks."""
    if isinstance(node, AssignNode):
        return [node.expr]
    if isinstance(node, SendNode):
        return [node.receiver] + list(node.args)
    if isinstance(node, BlockNode):
        return list(node.body)
    if isinstance(node, ReturnNode):
        return [node.expr]
    return []


def assign_paths(root):
    """Assign each node its address: the child-index trail from the root.

    The root is a MethodNode (children = body statements) or a single Expr
    (path ()). Addresses stay stable across unparse/reparse because the
    child ordering is part of the node structure.
    """
    if isinstance(root, MethodNode):
        stack = [(stmt, (i,)) for i, stmt in enumerate(root.body)]
    else:
        root.path = ()
        stack = [(root, ())]
    while stack:
        node, path = stack.pop()
        node.path = path
        for i, child in enumerate(children(node)):
            stack.append((child, path + (i,)))
    return root


def node_at(root, path):
    """Resolve a node address produced by assign_paths. Raises KeyError."""
    if isinstance(root, MethodNode):
        if not path:
            raise KeyError(path)
        try:
            node = root.body[path[0]]
        except IndexError:
            raise KeyError(path) from None
        rest = path[1:]
    else:
        node = root
        rest = path
    for index in rest:
        kids = children(node)
        if index >= len(kids):
            raise KeyError(path)
        node = kids[index]
    return node


def walk(root):
    """Yield every node under root (body statements for a MethodNode)."""
    if isinstance(root, MethodNode):
        stack = list(root.body)
    else:
        stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(children(node))


def selector_arity(selector):
    if selector.endswith(":"):
        return selector.count(":")
    if selector[0].isalpha() or selector[0] == "_":
        return 0
    return 1  # binary operator


def selector_kind(selector):
    if selector.endswith(":"):
        return "keyword"
    if selector[0].isalpha() or selector[0] == "_":
        return "unary"
    return "binary"
