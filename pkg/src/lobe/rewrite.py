"""Call-site rewriting: metavariable patterns, templates, and code queries.

A rewrite rule pairs a pattern send (metavariables allowed) with a template
send whose metavariables are a subset of the pattern's. Matching binds each
metavariable to a candidate subtree; substitution splices the bound subtrees
into a copy of the template.
"""

import copy

from .nodes import (
    AssignNode,
    BlockNode,
    LiteralNode,
    MetaVarNode,
    ReturnNode,
    SelfNode,
    SendNode,
    VarReadNode,
    assign_paths,
    node_at,
    walk,
)
from .parser import parse_expression
from .unparse import unparse_method


class RewriteError(Exception):
    pass


class RewriteRule:
    """Deprecation notice plus optional pattern -> template call rewriting."""

    def __init__(self, message, pattern=None, template=None):
        self.message = message
        self.pattern = pattern
        self.template = template

    @property
    def rewrites(self):
        return self.pattern is not None


def metavar_names(node):
    return {n.name for n in walk(node) if isinstance(n, MetaVarNode)}


def compile_deprecation(method_node):
    """Build the method's rewrite rule from its deprecated:... pragma.

    Returns None when no deprecation pragma is present. Pattern problems are
    reported here, at compile time, not at activation time.
    """
    for pragma in method_node.pragmas:
        if pragma.selector == "deprecated:":
            message = pragma.args[0]
            if not isinstance(message, str):
                raise RewriteError("deprecated: expects a string message")
            return RewriteRule(message)
        if pragma.selector == "deprecated:rewriteFrom:rewriteTo:":
            message, from_text, to_text = pragma.args
            if not all(isinstance(a, str) for a in pragma.args):
                raise RewriteError("deprecation pragma arguments must be strings")
            pattern = parse_expression(from_text, pattern_mode=True)
            template = parse_expression(to_text, pattern_mode=True)
            if not isinstance(pattern, SendNode):
                raise RewriteError("rewriteFrom: pattern must be a message send")
            if pattern.selector != method_node.selector:
                raise RewriteError(
                    f"rewriteFrom: selector {pattern.selector!r} does not match "
                    f"the deprecated method {method_node.selector!r}")
            if not isinstance(template, SendNode):
                raise RewriteError("rewriteTo: template must be a message send")
            unbound = metavar_names(template) - metavar_names(pattern)
            if unbound:
                raise RewriteError(
                    f"rewriteTo: uses unbound metavariables {sorted(unbound)}")
            return RewriteRule(message, pattern, template)
    return None


def match_pattern(pattern, candidate):
    """Match candidate against pattern; a bindings dict, or None on mismatch.

    Metavariables match any subtree. Everything else must agree on node kind,
    names, selectors and literal values, recursively.
    """
    bindings = {}
    if _match(pattern, candidate, bindings):
        return bindings
    return None


def _match(pat, cand, bindings):
    if isinstance(pat, MetaVarNode):
        if pat.name in bindings:
            return bindings[pat.name] == cand
        bindings[pat.name] = cand
        return True
    if type(pat) is not type(cand):
        return False
    if isinstance(pat, LiteralNode):
        return pat.value == cand.value and type(pat.value) is type(cand.value)
    if isinstance(pat, VarReadNode):
        return pat.name == cand.name
    if isinstance(pat, SelfNode):
        return True
    if isinstance(pat, AssignNode):
        return pat.name == cand.name and _match(pat.expr, cand.expr, bindings)
    if isinstance(pat, ReturnNode):
        return _match(pat.expr, cand.expr, bindings)
    if isinstance(pat, SendNode):
        if pat.selector != cand.selector or len(pat.args) != len(cand.args):
            return False
        if not _match(pat.receiver, cand.receiver, bindings):
            return False
        return all(_match(p, c, bindings) for p, c in zip(pat.args, cand.args))
    if isinstance(pat, BlockNode):
        if pat.params != cand.params or len(pat.body) != len(cand.body):
            return False
        return all(_match(p, c, bindings) for p, c in zip(pat.body, cand.body))
    return False


def substitute(template, bindings):
    """Copy of template with each metavariable replaced by its bound subtree."""
    if isinstance(template, MetaVarNode):
        return copy.deepcopy(bindings[template.name])
    node = copy.copy(template)
    if isinstance(node, SendNode):
        node.receiver = substitute(template.receiver, bindings)
        node.args = [substitute(a, bindings) for a in template.args]
    elif isinstance(node, AssignNode):
        node.expr = substitute(template.expr, bindings)
    elif isinstance(node, ReturnNode):
        node.expr = substitute(template.expr, bindings)
    elif isinstance(node, BlockNode):
        node.body = [substitute(s, bindings) for s in template.body]
    return node


def rewrite_call_site(method_def, site_path, rule):
    """New source for the method with the send at site_path rewritten.

    Pure: parses nothing into the world; the caller decides whether to
    install the result. Raises RewriteError when the site does not match.
    """
    method = copy.deepcopy(method_def.node)
    assign_paths(method)
    try:
        site = node_at(method, site_path)
    except KeyError:
        raise RewriteError(f"no node at path {site_path} in "
                           f"{method_def.owner}>>{method_def.selector}") from None
    bindings = match_pattern(rule.pattern, site)
    if bindings is None:
        raise RewriteError(
            f"send at {site_path} in {method_def.owner}>>{method_def.selector} "
            f"does not match the rewrite pattern")
    replacement = substitute(rule.template, bindings)
    _replace_node(method, site_path, replacement)
    assign_paths(method)
    return unparse_method(method)


def _replace_node(method, path, replacement):
    if len(path) == 1:
        method.body[path[0]] = replacement
        return
    parent = node_at(method, path[:-1])
    index = path[-1]
    if isinstance(parent, SendNode):
        if index == 0:
            parent.receiver = replacement
        else:
            parent.args[index - 1] = replacement
    elif isinstance(parent, (AssignNode, ReturnNode)):
        parent.expr = replacement
    elif isinstance(parent, BlockNode):
        parent.body[index] = replacement
    else:
        raise RewriteError(f"cannot splice into {type(parent).__name__}")


# -- code queries ------------------------------------------------------------


def senders_of(world, selector):
    """Static senders: methods whose AST contains a send of the selector."""
    found = []
    for class_name in sorted(world.classes):
        cref = world.classes[class_name]
        for sel in sorted(cref.method_dict):
            mdef = cref.method_dict[sel]
            paths = [n.path for n in walk(mdef.node)
                     if isinstance(n, SendNode) and n.selector == selector]
            if paths:
                paths.sort()
                found.append({"className": class_name, "selector": sel,
                              "sitePaths": paths})
    return found


def implementors_of(world, selector):
    found = []
    for class_name in sorted(world.classes):
        mdef = world.classes[class_name].method_dict.get(selector)
        if mdef is not None:
            found.append(mdef)
    return found


def on_deprecated_activation(world, emit, deprecated_mdef, caller_method,
                             caller_node, caller_label):
    """Warn about an activation of a deprecated method; rewrite its call site.

    caller_method/caller_node identify the send being executed; both may be
    None for synthetic callers (top-level evals), which are warned but never
    rewritten. The running activation is untouched either way: only the
    installed source changes, so the rewrite takes effect on the next run.
    """
    rule = deprecated_mdef.deprecation
    rewritten = False
    if (rule is not None and rule.rewrites and caller_method is not None
            and caller_node is not None):
        installed = world.classes.get(caller_method.owner)
        installed = installed.method_dict.get(caller_method.selector) if installed else None
        if installed is not None:
            try:
                new_source = rewrite_call_site(installed, caller_node.path, rule)
                world.define_method(caller_method.owner, new_source,
                                    origin="deprecationRewrite")
                rewritten = True
            except RewriteError:
                rewritten = False  # dynamic or already-migrated site: warn only
    emit({
        "event": "deprecation",
        "selector": deprecated_mdef.selector,
        "caller": caller_label,
        "message": rule.message if rule else "",
        "rewritten": rewritten,
    })
    return rewritten
