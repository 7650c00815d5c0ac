"""Structured object inspection: raw views, custom views, navigation.

Reports carry data, never pixels. Every view row that leads somewhere holds
an object id the client can inspect next; literal values get transient ids.
Custom views come from methods tagged <inspectorView: 'Title' order: N> on
the receiver's class chain and run contained: a broken view renders as an
error text, it never opens a debug session or touches the journal.
"""

from .interp import ContainedError
from .objspace import ObjectRef

RAW_VIEW_ORDER = 1_000_000


def discover_custom_views(world, value):
    """(selector, title, order) triples; the most specific class wins a selector."""
    cref = (value.class_ref if isinstance(value, ObjectRef)
            else world.classes.get(world.class_of_value(value)))
    if cref is None:
        return []
    taken = set()
    views = []
    for klass in world.chain(cref):
        for selector in sorted(klass.method_dict):
            if selector in taken or ":" in selector:
                continue
            mdef = klass.method_dict[selector]
            for pragma in mdef.pragmas:
                if pragma.selector != "inspectorView:order:":
                    continue
                title, order = pragma.args[0], pragma.args[1]
                if isinstance(title, str) and isinstance(order, int):
                    views.append((selector, title, order))
                    taken.add(selector)
                break
    return views


def inspect_object(kernel, object_id):
    value = kernel.value_by_id(object_id)
    class_name = kernel.world.class_of_value(value)
    views = []
    for selector, title, order in discover_custom_views(kernel.world, value):
        view_id = _register_view(kernel, object_id, "custom", selector, title, order)
        views.append({"viewId": view_id, "title": title, "order": order,
                      "kind": None, "content": None})
    raw_id = _register_view(kernel, object_id, "raw", None, "Raw", RAW_VIEW_ORDER)
    raw = _raw_descriptor(kernel, value)
    raw.update({"viewId": raw_id, "title": "Raw", "order": RAW_VIEW_ORDER})
    views.append(raw)
    views.sort(key=lambda v: (v["order"], v["title"]))
    return {
        "objectId": object_id,
        "className": class_name,
        "printString": kernel.print_value(value),
        "views": views,
    }


def view_content(kernel, object_id, view_id):
    entry = kernel.views.get(view_id)
    if entry is None or entry[0] != object_id:
        from .kernel import KernelError

        raise KernelError(f"unknown view id {view_id}")
    _oid, kind, selector, title, order = entry
    value = kernel.value_by_id(object_id)
    if kind == "raw":
        descriptor = _raw_descriptor(kernel, value)
    else:
        descriptor = _evaluate_custom_view(kernel, value, selector)
    descriptor.update({"viewId": view_id, "title": title, "order": order})
    return descriptor


def _register_view(kernel, object_id, kind, selector, title, order):
    kernel._view_counter += 1
    view_id = kernel._view_counter
    kernel.views[view_id] = (object_id, kind, selector, title, order)
    return view_id


def _raw_descriptor(kernel, value):
    if isinstance(value, ObjectRef):
        rows = []
        for name in kernel.world.effective_fields(value.class_ref):
            field_value = value.fields.get(name)
            rows.append({"label": name,
                         "printString": kernel.print_value(field_value),
                         "objectId": kernel.navigable_id(field_value)})
        return {"kind": "fields", "content": rows}
    if isinstance(value, list):
        rows = [{"label": str(i + 1),
                 "printString": kernel.print_value(element),
                 "objectId": kernel.navigable_id(element)}
                for i, element in enumerate(value)]
        return {"kind": "fields", "content": rows}
    if isinstance(value, str):
        return {"kind": "text", "content": value}
    return {"kind": "text", "content": kernel.print_value(value)}


def _evaluate_custom_view(kernel, value, selector):
    try:
        result = kernel.contained_send(value, selector)
    except ContainedError as err:
        return {"kind": "text", "content": f"error: {err}"}
    if isinstance(result, str):
        return {"kind": "text", "content": result}
    if isinstance(result, list) and all(isinstance(row, list) for row in result):
        rows = []
        for row in result:
            label = row[0] if row else None
            cell = row[1] if len(row) > 1 else None
            rows.append({
                "label": label if isinstance(label, str) else kernel.print_value(label),
                "printString": kernel.print_value(cell),
                "objectId": kernel.navigable_id(cell),
            })
        return {"kind": "table", "content": rows}
    descriptor = _raw_descriptor(kernel, result)
    if descriptor["kind"] != "fields":
        descriptor = {"kind": "fields",
                      "content": [{"label": "value",
                                   "printString": kernel.print_value(result),
                                   "objectId": kernel.navigable_id(result)}]}
    return descriptor
