"""Tiny structural matcher for the golden report schema.

Golden leaves are ``|``-separated type names; a one-element list describes
every element of the corresponding list. Dict keys must match in order.
"""

_TYPES = {
    "string": lambda v: isinstance(v, str),
    "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "null": lambda v: v is None,
}


def mismatches(doc, golden, path="$"):
    if isinstance(golden, dict):
        if not isinstance(doc, dict):
            return [f"{path}: expected object"]
        if list(doc) != list(golden):
            return [f"{path}: keys {list(doc)} != {list(golden)}"]
        return [m for k in golden for m in mismatches(doc[k], golden[k], f"{path}.{k}")]
    if isinstance(golden, list):
        if not isinstance(doc, list):
            return [f"{path}: expected array"]
        return [m for i, item in enumerate(doc) for m in mismatches(item, golden[0], f"{path}[{i}]")]
    if not any(_TYPES[t](doc) for t in golden.split("|")):
        return [f"{path}: {doc!r} is not {golden}"]
    return []
