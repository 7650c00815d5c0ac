import pytest

from lobe import Kernel
from lobe.nodes import LiteralNode, MetaVarNode, SendNode, VarReadNode, walk
from lobe.objspace import World, WorldError
from lobe.parser import parse_expression, parse_method, parse_program
from lobe.rewrite import (
    RewriteError,
    compile_deprecation,
    match_pattern,
    rewrite_call_site,
    substitute,
)

from conftest import load_fixture


def pattern(text):
    return parse_expression(text, pattern_mode=True)


class TestMatchPattern:
    def test_keyword_send_binds_metavariables(self):
        bindings = match_pattern(
            pattern("@r schedulePackage: @p for: @d"),
            parse_expression("plan schedulePackage: pkg for: today"))
        assert bindings == {"r": VarReadNode("plan"), "p": VarReadNode("pkg"),
                            "d": VarReadNode("today")}

    def test_selector_mismatch(self):
        assert match_pattern(
            pattern("@r schedulePackage: @p for: @d"),
            parse_expression("plan schedule: pkg")) is None

    def test_literal_mismatch(self):
        assert match_pattern(pattern("@r foo: 1"),
                             parse_expression("x foo: 2")) is None
        assert match_pattern(pattern("@r foo: 1"),
                             parse_expression("x foo: 1")) == {"r": VarReadNode("x")}

    def test_metavariable_binds_whole_subtree(self):
        bindings = match_pattern(pattern("@r foo: @a"),
                                 parse_expression("(x bar: 1) foo: 2 + 3"))
        assert bindings["r"].selector == "bar:"
        assert bindings["a"].selector == "+"

    def test_repeated_metavariable_requires_equal_subtrees(self):
        assert match_pattern(pattern("@x + @x"),
                             parse_expression("a + a")) == {"x": VarReadNode("a")}
        assert match_pattern(pattern("@x + @x"),
                             parse_expression("a + b")) is None

    def test_self_and_blocks_match_structurally(self):
        assert match_pattern(pattern("self foo: [ :e | e ]"),
                             parse_expression("self foo: [ :e | e ]")) == {}
        assert match_pattern(pattern("self foo: [ :e | e ]"),
                             parse_expression("self foo: [ :x | x ]")) is None


class TestSubstitute:
    def test_splices_bound_subtrees(self):
        bindings = match_pattern(
            pattern("@r schedulePackage: @p for: @d"),
            parse_expression("(depot plan) schedulePackage: pkg for: today"))
        result = substitute(pattern("@r planDeliveryOf: @p on: @d"), bindings)
        from lobe.unparse import unparse

        assert unparse(result) == "depot plan planDeliveryOf: pkg on: today"

    def test_copies_do_not_alias_bindings(self):
        bindings = {"x": parse_expression("a + b")}
        first = substitute(pattern("@x"), bindings)
        second = substitute(pattern("@x"), bindings)
        assert first == second
        assert first is not second


class TestRewriteCallSite:
    def _rule(self):
        return compile_deprecation(parse_method(
            "schedulePackage: p for: d "
            "<deprecated: 'use planDeliveryOf:on:' "
            "rewriteFrom: '@r schedulePackage: @p for: @d' "
            "rewriteTo: '@r planDeliveryOf: @p on: @d'> [ ^ nil ]"))

    def _method_def(self, kernel, source):
        kernel.load_source(f"class Caller [ {source} ]")
        return kernel.world.class_named("Caller").method_dict[
            parse_method(source).selector]

    def test_simple_rewrite(self, kernel):
        mdef = self._method_def(
            kernel, "go [ ^ plan schedulePackage: pkg for: today ]")
        site = next(n.path for n in walk(mdef.node)
                    if isinstance(n, SendNode) and n.selector == "schedulePackage:for:")
        new_source = rewrite_call_site(mdef, site, self._rule())
        assert "planDeliveryOf: pkg on: today" in new_source
        assert "schedulePackage:" not in new_source
        parse_method(new_source)  # reparses cleanly

    def test_nested_receiver_preserved(self, kernel):
        mdef = self._method_def(
            kernel,
            "go: depot [ ^ (depot plan) schedulePackage: pkg for: today ]")
        site = next(n.path for n in walk(mdef.node)
                    if isinstance(n, SendNode) and n.selector == "schedulePackage:for:")
        new_source = rewrite_call_site(mdef, site, self._rule())
        assert "depot plan planDeliveryOf: pkg on: today" in new_source

    def test_non_matching_site_errors_and_changes_nothing(self, kernel):
        mdef = self._method_def(kernel, "go [ ^ plan other: 1 ]")
        site = next(n.path for n in walk(mdef.node)
                    if isinstance(n, SendNode) and n.selector == "other:")
        before = mdef.source_text
        with pytest.raises(RewriteError):
            rewrite_call_site(mdef, site, self._rule())
        assert mdef.source_text == before

    def test_rewrite_soundness(self, kernel):
        mdef = self._method_def(
            kernel, "go [ ^ plan schedulePackage: pkg for: today ]")
        rule = self._rule()
        site = next(n.path for n in walk(mdef.node)
                    if isinstance(n, SendNode) and n.selector == "schedulePackage:for:")
        new_source = rewrite_call_site(mdef, site, rule)
        new_method = parse_method(new_source)
        from lobe.nodes import node_at

        landed = node_at(new_method, site)
        assert match_pattern(rule.pattern, landed) is None
        assert landed.selector == "planDeliveryOf:on:"


class TestDeprecationPragmaCompilation:
    def test_plain_deprecation_warns_only(self):
        rule = compile_deprecation(parse_method(
            "old <deprecated: 'use new'> [ ^ nil ]"))
        assert rule.message == "use new"
        assert not rule.rewrites

    def test_selector_mismatch_fails_at_compile_time(self):
        world = World()
        decls = parse_program(
            "class A [ old <deprecated: 'x' rewriteFrom: '@r wrong' "
            "rewriteTo: '@r new'> [ ^ nil ] ]")
        with pytest.raises(WorldError):
            world.define_class(decls[0])

    def test_unbound_template_metavar_rejected(self):
        with pytest.raises(RewriteError):
            compile_deprecation(parse_method(
                "old <deprecated: 'x' rewriteFrom: '@r old' "
                "rewriteTo: '@r new: @mystery'> [ ^ nil ]"))

    def test_no_pragma_no_rule(self):
        assert compile_deprecation(parse_method("f [ ^ 1 ]")) is None


class TestDeprecatedActivation:
    def test_first_run_warns_and_rewrites_second_run_silent(self, kernel, events):
        load_fixture(kernel, "deprecation.lob")
        first = kernel.evaluate("DispatchDesk new requestDelivery: nil")
        assert first["value"] == "planned"
        warnings = [e for e in events if e["event"] == "deprecation"]
        assert len(warnings) == 1
        assert warnings[0]["rewritten"] is True
        assert warnings[0]["caller"] == "DispatchDesk>>requestDelivery:"
        assert "planDeliveryOf:" in kernel.method_source("DispatchDesk",
                                                         "requestDelivery:")
        events.clear()
        second = kernel.evaluate("DispatchDesk new requestDelivery: nil")
        assert second["value"] == "planned"
        assert [e for e in events if e["event"] == "deprecation"] == []

    def test_two_sites_rewritten_independently(self, kernel, events):
        load_fixture(kernel, "deprecation.lob")
        kernel.evaluate("DispatchDesk new requestDelivery: nil")
        kernel.evaluate("CustomerPortal new expressShip: nil")
        warnings = [e for e in events if e["event"] == "deprecation"]
        assert len(warnings) == 2
        rewrites = [r for r in kernel.journal_slice()
                    if r.origin == "deprecationRewrite"]
        assert len(rewrites) == 2
        assert {r.class_name for r in rewrites} == {"DispatchDesk", "CustomerPortal"}

    def test_top_level_caller_warned_never_rewritten(self, kernel, events):
        load_fixture(kernel, "deprecation.lob")
        before = kernel.world.digest()
        outcome = kernel.evaluate("RoutePlan new schedulePackage: nil for: nil")
        assert outcome["value"] == "planned"
        warnings = [e for e in events if e["event"] == "deprecation"]
        assert len(warnings) == 1
        assert warnings[0]["rewritten"] is False
        assert warnings[0]["caller"] == "<top>"
        assert kernel.world.digest() == before

    def test_behavior_preserved_across_rewrite(self, kernel):
        load_fixture(kernel, "deprecation.lob")
        before = kernel.evaluate("DispatchDesk new requestDelivery: nil")["value"]
        after = kernel.evaluate("DispatchDesk new requestDelivery: nil")["value"]
        assert before == after == "planned"

    def test_call_site_inside_a_block_is_rewritten_in_home_method(self, kernel, events):
        load_fixture(kernel, "deprecation.lob")
        kernel.load_source(
            "class Deferred [ plan [ ^ [ RoutePlan new schedulePackage: nil for: nil ] value ] ]")
        outcome = kernel.evaluate("Deferred new plan")
        assert outcome["value"] == "planned"
        warnings = [e for e in events if e["event"] == "deprecation"]
        assert warnings[-1]["caller"] == "Deferred>>[] in plan"
        assert warnings[-1]["rewritten"] is True
        new_source = kernel.method_source("Deferred", "plan")
        assert "planDeliveryOf:" in new_source
        assert kernel.evaluate("Deferred new plan")["value"] == "planned"

    def test_current_activation_completes_with_old_body(self, kernel, events):
        kernel.load_source(
            "class Old [ tick "
            "<deprecated: 'use tock' rewriteFrom: '@r tick' rewriteTo: '@r tock'> "
            "[ ^ 'old result' ] tock [ ^ 'new result' ] ]"
            "class User [ use [ ^ Old new tick ] ]")
        first = kernel.evaluate("User new use")
        assert first["value"] == "old result"  # the running activation finishes as-is
        second = kernel.evaluate("User new use")
        assert second["value"] == "new result"


class TestSendersImplementors:
    def test_implementors_across_classes(self, kernel):
        load_fixture(kernel, "strategies.lob")
        found = kernel.implementors_of("schedulePackage:for:")
        assert [m.owner for m in found] == ["BalancedStrategy", "EagerStrategy",
                                            "LazyStrategy"]

    def test_senders_before_and_after_rewrite(self, kernel):
        load_fixture(kernel, "deprecation.lob")
        senders = kernel.senders_of("schedulePackage:for:")
        callers = {(s["className"], s["selector"]) for s in senders}
        assert callers == {("DispatchDesk", "requestDelivery:"),
                           ("CustomerPortal", "expressShip:")}
        kernel.evaluate("DispatchDesk new requestDelivery: nil")
        kernel.evaluate("CustomerPortal new expressShip: nil")
        assert kernel.senders_of("schedulePackage:for:") == []

    def test_site_paths_address_send_nodes(self, kernel):
        kernel.load_source(
            "class A [ f [ self g. ^ [ self g ] value ] g [ ^ 1 ] ]")
        senders = kernel.senders_of("g")
        assert len(senders) == 1
        assert len(senders[0]["sitePaths"]) == 2
        from lobe.nodes import node_at

        mdef = kernel.world.class_named("A").method_dict["f"]
        for path in senders[0]["sitePaths"]:
            node = node_at(mdef.node, tuple(path))
            assert node.selector == "g"

    def test_unknown_selector_queries_empty(self, kernel):
        assert kernel.senders_of("ghost:") == []
        assert kernel.implementors_of("ghost:") == []

    def test_query_duality(self, kernel):
        load_fixture(kernel, "logistics.lob")
        for selector in ("addDelivery:on:", "defaultSchedulePlan", "location"):
            for mdef in kernel.implementors_of(selector):
                assert mdef.selector == selector
            for entry in kernel.senders_of(selector):
                mdef = kernel.world.class_named(
                    entry["className"]).method_dict[entry["selector"]]
                from lobe.nodes import node_at

                for path in entry["sitePaths"]:
                    assert node_at(mdef.node, tuple(path)).selector == selector
