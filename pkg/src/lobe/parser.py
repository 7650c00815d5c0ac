"""Lexer and recursive-descent parser for the .lob object language.

Grammar (UTF-8 source, "..." comments ignored):

    program   := classDef*
    classDef  := "class" IDENT ("extends" IDENT)? "[" ("|" IDENT* "|")? methodDef* "]"
    methodDef := pattern pragma* "[" ("|" IDENT* "|")? stmts "]"
    pattern   := IDENT | BINSEL IDENT | (KEYWORD IDENT)+
    pragma    := "<" (IDENT | (KEYWORD literal)+) ">"
    stmts     := (stmt ".")* stmt?
    stmt      := "^" expr | IDENT ":=" expr | expr
    expr      := binexp (KEYWORD binexp)*
    binexp    := unexp (BINSEL unexp)*
    unexp     := primary IDENT*
    primary   := literal | IDENT | "self" | "(" expr ")"
               | "[" (":" IDENT)* "|"? stmts "]" | "@" IDENT
    BINSEL    := + - * / < <= > >= = == ,

Literals: integers, 'strings' (escape ''), #symbols, true/false/nil and
#( ... ) arrays of literals. Metavariables (@name) parse only in pattern
mode. Precedence is unary > binary > keyword; binary operators all bind
equally and associate left to right.
"""

from .nodes import (
    AssignNode,
    BlockNode,
    ClassDecl,
    LiteralNode,
    MetaVarNode,
    MethodNode,
    Pragma,
    ReturnNode,
    SelfNode,
    SendNode,
    Symbol,
    VarReadNode,
    assign_paths,
    selector_arity,
)

BINARY_SELECTORS = ("==", "<=", ">=", "+", "-", "*", "/", "<", ">", "=", ",")
_RESERVED = ("self", "true", "false", "nil")
_PUNCT = {"[": "lbrack", "]": "rbrack", "(": "lparen", ")": "rparen",
          "^": "caret", ".": "dot", "|": "pipe", "@": "at", ";": "semi"}


class LobSyntaxError(Exception):
    """Syntax error with 1-based line/column and what was expected."""

    def __init__(self, message, line, col):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class Token:
    __slots__ = ("type", "value", "line", "col", "start", "end")

    def __init__(self, type, value, line, col, start, end):
        self.type = type
        self.value = value
        self.line = line
        self.col = col
        self.start = start
        self.end = end

    def __repr__(self):
        return f"Token({self.type!r}, {self.value!r}, {self.line}:{self.col})"


def tokenize(source):
    tokens = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def error(msg, l=None, c=None):
        raise LobSyntaxError(msg, l if l is not None else line, c if c is not None else col)

    def advance(k):
        nonlocal i, line, col
        for _ in range(k):
            if source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if ch == '"':  # comment
            start_l, start_c = line, col
            advance(1)
            while i < n and source[i] != '"':
                advance(1)
            if i >= n:
                error("unterminated comment", start_l, start_c)
            advance(1)
            continue
        start, start_l, start_c = i, line, col
        if ch.isdigit():
            while i < n and source[i].isdigit():
                advance(1)
            tokens.append(Token("int", int(source[start:i]), start_l, start_c, start, i))
            continue
        if ch.isalpha() or ch == "_":
            while i < n and (source[i].isalnum() or source[i] == "_"):
                advance(1)
            word = source[start:i]
            # ident directly followed by ':' (but not ':=') is a keyword part
            if i < n and source[i] == ":" and not (i + 1 < n and source[i + 1] == "="):
                advance(1)
                tokens.append(Token("keyword", word + ":", start_l, start_c, start, i))
            else:
                tokens.append(Token("ident", word, start_l, start_c, start, i))
            continue
        if ch == "'":
            advance(1)
            parts = []
            while True:
                if i >= n:
                    error("unterminated string literal", start_l, start_c)
                if source[i] == "'":
                    if i + 1 < n and source[i + 1] == "'":
                        parts.append("'")
                        advance(2)
                        continue
                    advance(1)
                    break
                parts.append(source[i])
                advance(1)
            tokens.append(Token("string", "".join(parts), start_l, start_c, start, i))
            continue
        if ch == "#":
            if i + 1 < n and source[i + 1] == "(":
                advance(2)
                tokens.append(Token("arraystart", "#(", start_l, start_c, start, i))
                continue
            advance(1)
            j = i
            while i < n and (source[i].isalnum() or source[i] in "_:"):
                advance(1)
            if i == j:
                error("empty symbol literal", start_l, start_c)
            tokens.append(Token("symbol", source[j:i], start_l, start_c, start, i))
            continue
        if ch == ":":
            if i + 1 < n and source[i + 1] == "=":
                advance(2)
                tokens.append(Token("assign", ":=", start_l, start_c, start, i))
            else:
                advance(1)
                tokens.append(Token("colon", ":", start_l, start_c, start, i))
            continue
        two = source[i:i + 2]
        if two in ("==", "<=", ">="):
            advance(2)
            tokens.append(Token("binsel", two, start_l, start_c, start, i))
            continue
        if ch in "+-*/<>=,":
            advance(1)
            tokens.append(Token("binsel", ch, start_l, start_c, start, i))
            continue
        if ch in _PUNCT:
            advance(1)
            tokens.append(Token(_PUNCT[ch], ch, start_l, start_c, start, i))
            continue
        error(f"unexpected character {ch!r}")
    tokens.append(Token("eof", None, line, col, n, n))
    return tokens


class Parser:
    def __init__(self, source, pattern_mode=False):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0
        self.pattern_mode = pattern_mode

    # -- token plumbing ----------------------------------------------------

    def peek(self, offset=0):
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.pos]
        if tok.type != "eof":
            self.pos += 1
        return tok

    def expect(self, type, what=None):
        tok = self.peek()
        if tok.type != type:
            self.fail(f"expected {what or type}, found {self.describe(tok)}", tok)
        return self.next()

    def describe(self, tok):
        if tok.type == "eof":
            return "end of input"
        return repr(tok.value)

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise LobSyntaxError(message, tok.line, tok.col)

    def at_binsel(self, value=None):
        tok = self.peek()
        return tok.type == "binsel" and (value is None or tok.value == value)

    # -- entry points ------------------------------------------------------

    def parse_program(self):
        decls = []
        while self.peek().type != "eof":
            decls.append(self.parse_class_decl())
        return decls

    def parse_method_source(self):
        method = self.parse_method_def()
        self.expect("eof", "end of method")
        method.source_text = self.source.strip()
        return method

    def parse_single_expression(self):
        expr = self.parse_expr()
        self.expect("eof", "end of expression")
        return assign_paths(expr)

    def parse_statement_list(self):
        temps = self.parse_temp_decls()
        stmts = self.parse_stmts(("eof",))
        self.expect("eof", "end of input")
        for i, stmt in enumerate(stmts):
            _reroot(stmt, (i,))
        return temps, stmts

    # -- declarations ------------------------------------------------------

    def parse_class_decl(self):
        kw = self.peek()
        if not (kw.type == "ident" and kw.value == "class"):
            self.fail(f"expected 'class', found {self.describe(kw)}")
        self.next()
        name_tok = self.peek()
        if name_tok.type != "ident":
            self.fail(f"expected class name, found {self.describe(name_tok)}")
        self.next()
        name = name_tok.value
        if not name[0].isupper():
            self.fail(f"class name {name!r} must start with an uppercase letter", name_tok)
        super_name = None
        if self.peek().type == "ident" and self.peek().value == "extends":
            self.next()
            super_name = self.expect("ident", "superclass name").value
        self.expect("lbrack", "'['")
        fields = self.parse_temp_decls()
        seen_fields = set()
        for f in fields:
            if f in seen_fields:
                self.fail(f"duplicate field name {f!r} in class {name}", name_tok)
            seen_fields.add(f)
        methods = []
        selectors = set()
        while self.peek().type != "rbrack":
            start_tok = self.peek()
            method = self.parse_method_def()
            end = self.tokens[self.pos - 1].end
            method.source_text = self.source[start_tok.start:end]
            if method.selector in selectors:
                self.fail(f"duplicate method {method.selector!r} in class {name}", start_tok)
            selectors.add(method.selector)
            methods.append(method)
        self.expect("rbrack", "']'")
        decl = ClassDecl(name, super_name, fields, methods)
        decl.line, decl.col = kw.line, kw.col
        return decl

    def parse_method_def(self):
        head = self.peek()
        selector_parts = []
        params = []
        if head.type == "ident":
            self.next()
            selector = head.value
        elif head.type == "binsel":
            self.next()
            params.append(self.expect("ident", "parameter name").value)
            selector = head.value
        elif head.type == "keyword":
            while self.peek().type == "keyword":
                selector_parts.append(self.next().value)
                params.append(self.expect("ident", "parameter name").value)
            selector = "".join(selector_parts)
        else:
            self.fail(f"expected method pattern, found {self.describe(head)}")
        if len(set(params)) != len(params):
            self.fail("duplicate parameter name", head)
        pragmas = []
        while self.at_binsel("<"):
            pragmas.append(self.parse_pragma())
        self.expect("lbrack", "'['")
        temps = self.parse_temp_decls()
        for t in temps:
            if t in params:
                self.fail(f"temp {t!r} shadows a parameter", head)
        if len(set(temps)) != len(temps):
            self.fail("duplicate temp name", head)
        body = self.parse_stmts(("rbrack",))
        self.expect("rbrack", "']'")
        method = MethodNode(selector, params, pragmas, temps, body)
        method.line, method.col = head.line, head.col
        assign_paths(method)
        return method

    def parse_pragma(self):
        open_tok = self.next()  # the '<'
        tok = self.peek()
        if tok.type == "ident":
            self.next()
            pragma = Pragma(tok.value, [])
        elif tok.type == "keyword":
            parts = []
            args = []
            while self.peek().type == "keyword":
                parts.append(self.next().value)
                args.append(self.parse_literal_value())
            pragma = Pragma("".join(parts), args)
        else:
            self.fail(f"expected pragma selector, found {self.describe(tok)}")
        closer = self.peek()
        if not self.at_binsel(">"):
            self.fail(f"expected '>' to close pragma, found {self.describe(closer)}")
        self.next()
        pragma.line, pragma.col = open_tok.line, open_tok.col
        return pragma

    def parse_temp_decls(self):
        if self.peek().type != "pipe":
            return []
        self.next()
        names = []
        while self.peek().type == "ident":
            names.append(self.next().value)
        self.expect("pipe", "'|'")
        return names

    # -- statements and expressions ----------------------------------------

    def parse_stmts(self, terminators):
        stmts = []
        while self.peek().type not in terminators:
            stmts.append(self.parse_stmt())
            if self.peek().type == "dot":
                self.next()
            else:
                break
        if self.peek().type not in terminators:
            self.fail(f"expected '.' or end of body, found {self.describe(self.peek())}")
        return stmts

    def parse_stmt(self):
        tok = self.peek()
        if tok.type == "caret":
            self.next()
            node = ReturnNode(self.parse_expr())
            return node.at(tok.line, tok.col)
        if tok.type == "ident" and self.peek(1).type == "assign":
            self.next()
            self.next()
            node = AssignNode(tok.value, self.parse_expr())
            return node.at(tok.line, tok.col)
        return self.parse_expr()

    def parse_expr(self):
        receiver = self.parse_binexp()
        if self.peek().type != "keyword":
            return receiver
        parts = []
        args = []
        first = self.peek()
        while self.peek().type == "keyword":
            parts.append(self.next().value)
            args.append(self.parse_binexp())
        node = SendNode(receiver, "".join(parts), args)
        return node.at(first.line, first.col)

    def parse_binexp(self):
        node = self.parse_unexp()
        while self.at_binsel():
            op = self.next()
            arg = self.parse_unexp()
            node = SendNode(node, op.value, [arg]).at(op.line, op.col)
        return node

    def parse_unexp(self):
        node = self.parse_primary()
        while self.peek().type == "ident" and self.peek().value not in _RESERVED:
            tok = self.next()
            node = SendNode(node, tok.value, []).at(tok.line, tok.col)
        return node

    def parse_primary(self):
        tok = self.peek()
        if tok.type in ("int", "string", "symbol", "arraystart"):
            return self.parse_literal_node()
        if tok.type == "ident":
            self.next()
            if tok.value == "self":
                return SelfNode().at(tok.line, tok.col)
            if tok.value == "true":
                return LiteralNode(True).at(tok.line, tok.col)
            if tok.value == "false":
                return LiteralNode(False).at(tok.line, tok.col)
            if tok.value == "nil":
                return LiteralNode(None).at(tok.line, tok.col)
            return VarReadNode(tok.value).at(tok.line, tok.col)
        if tok.type == "lparen":
            self.next()
            expr = self.parse_expr()
            self.expect("rparen", "')'")
            return expr
        if tok.type == "lbrack":
            return self.parse_block()
        if tok.type == "at":
            if not self.pattern_mode:
                self.fail("metavariables are only allowed in patterns", tok)
            self.next()
            name = self.expect("ident", "metavariable name").value
            return MetaVarNode(name).at(tok.line, tok.col)
        self.fail(f"expected an expression, found {self.describe(tok)}")

    def parse_block(self):
        open_tok = self.expect("lbrack", "'['")
        params = []
        while self.peek().type == "colon":
            self.next()
            params.append(self.expect("ident", "block parameter").value)
        if params:
            self.expect("pipe", "'|' after block parameters")
        elif self.peek().type == "pipe":
            self.next()
        if len(set(params)) != len(params):
            self.fail("duplicate block parameter", open_tok)
        body = self.parse_stmts(("rbrack",))
        self.expect("rbrack", "']'")
        return BlockNode(params, [], body).at(open_tok.line, open_tok.col)

    def parse_literal_node(self):
        tok = self.peek()
        value = self.parse_literal_value()
        return LiteralNode(value).at(tok.line, tok.col)

    def parse_literal_value(self):
        tok = self.next()
        if tok.type == "int":
            return tok.value
        if tok.type == "string":
            return tok.value
        if tok.type == "symbol":
            return Symbol(tok.value)
        if tok.type == "ident" and tok.value in ("true", "false", "nil"):
            return {"true": True, "false": False, "nil": None}[tok.value]
        if tok.type == "arraystart":
            elements = []
            while self.peek().type != "rparen":
                if self.peek().type == "eof":
                    self.fail("unterminated literal array", tok)
                elements.append(self.parse_literal_value())
            self.next()
            return tuple(elements)
        self.fail(f"expected a literal, found {self.describe(tok)}", tok)


def _reroot(stmt, prefix):
    """Shift a statement subtree's addresses under the given prefix."""
    stmt.path = prefix
    stack = [stmt]
    from .nodes import children

    while stack:
        node = stack.pop()
        for i, child in enumerate(children(node)):
            child.path = node.path + (i,)
            stack.append(child)


def parse_program(source):
    """Parse class declarations in source order."""
    return Parser(source).parse_program()


def parse_method(source, pattern_mode=False):
    """Parse a single method definition (selector pattern + body)."""
    return Parser(source, pattern_mode).parse_method_source()


def parse_expression(source, pattern_mode=False):
    """Parse a single expression; pattern mode admits @metavariables."""
    return Parser(source, pattern_mode).parse_single_expression()


def parse_statements(source):
    """Parse a '.'-separated statement sequence (the eval/REPL entry).

    An optional leading | a b | declares evaluation-local temps. Returns
    (temp_names, statements).
    """
    return Parser(source).parse_statement_list()
