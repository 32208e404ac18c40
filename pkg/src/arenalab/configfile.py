"""Parser and serializer for the tagged arena-config dialect.

This is a deliberate subset, not a general YAML implementation. Grammar:

    document   := "!ArenaConfig" mapping(arenas)
    arenas     := "arenas:" ( "{}" | { INT ": !Arena" arena-body } )
    arena-body := { "t:" INT | "blackouts:" flow-list | "items:" item-seq | unknown }
    item-seq   := { "- !Item" item-body | "- ..." }
    item-body  := { "name:" IDENT | "positions:" vec-seq | "sizes:" vec-seq
                    | "colors:" rgb-seq | "rotations:" flow-list | unknown }
    vec-seq    := { "- !Vector3" "{x: NUM, y: NUM, z: NUM}" | "- ..." }
    rgb-seq    := { "- !RGB" "{r: INT, g: INT, b: INT}" | "- ..." }
    flow-list  := "[" NUM ("," NUM)* "]"          (may span lines)

Block mappings indent children deeper than the key; block-sequence dashes may
sit at the key's own indent or deeper. Comments run from an unquoted "#" to
end of line and are ignored, as are "- ..." elision entries (a listing
shorthand for repeated lines; the instance count comes from the longest field
list, so elided entries simply fall back to the randomize-beyond-list rule).
Unknown scalar keys inside !Arena / !Item are collected and surfaced as
warnings by validate_config, never as parse failures. Everything else
malformed raises ParseError with a 1-based line and column.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import ArenaConfigDoc, ArenaSpec, ItemSpec, Rgb, Vec3

DOC_TAG = "!ArenaConfig"
ARENA_TAG = "!Arena"
ITEM_TAG = "!Item"
VEC_TAG = "!Vector3"
RGB_TAG = "!RGB"

_INT_RE = re.compile(r"[-+]?\d+$")
_NUM_RE = re.compile(r"[-+]?(\d+\.\d*|\.\d+|\d+)([eE][-+]?\d+)?$")
_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*$")
_KEY_RE = re.compile(r"([A-Za-z0-9_\-]+):(\s+|$)")


class ParseError(ValueError):
    """Config syntax error, carrying a 1-based line/column and, for tag
    mismatches, the tag that was expected."""

    def __init__(self, message: str, line: int, col: int, expected_tag: str | None = None):
        self.line = line
        self.col = col
        self.expected_tag = expected_tag
        suffix = f" (expected {expected_tag})" if expected_tag else ""
        super().__init__(f"line {line}, col {col}: {message}{suffix}")


@dataclass
class _Line:
    num: int
    indent: int
    text: str  # content with indent and trailing comment removed


def _strip_comment(raw: str) -> str:
    for i, ch in enumerate(raw):
        if ch == "#" and (i == 0 or raw[i - 1] in " \t"):
            return raw[:i]
    return raw


def _scan(text: str) -> list[_Line]:
    lines: list[_Line] = []
    for num, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw).rstrip()
        if not body.strip():
            continue
        stripped = body.lstrip(" ")
        indent = len(body) - len(stripped)
        if "\t" in raw[: len(raw) - len(raw.lstrip())]:
            raise ParseError("tabs are not allowed in indentation", num, 1)
        lines.append(_Line(num, indent, stripped))
    return lines


def _parse_number(token: str, line: int, col: int, *, want_int: bool = False) -> float | int:
    token = token.strip()
    if _INT_RE.match(token):
        return int(token)
    if want_int:
        raise ParseError(f"expected an integer, got {token!r}", line, col)
    if _NUM_RE.match(token):
        return float(token)
    raise ParseError(f"expected a number, got {token!r}", line, col)


def _parse_flow_map(tag: str, text: str, line: _Line, keys: tuple[str, ...],
                    *, want_int: bool) -> dict[str, float | int]:
    """Parse '!Tag {k: v, k: v, k: v}' with exactly the given keys."""
    base_col = line.indent + 1
    if not text.startswith(tag):
        got = text.split()[0] if text.split() else ""
        raise ParseError(f"unknown tag {got!r}", line.num, base_col + (len(line.text) - len(text)),
                         expected_tag=tag)
    rest = text[len(tag):].strip()
    if not (rest.startswith("{") and rest.endswith("}")):
        raise ParseError(f"expected {{...}} after {tag}", line.num, base_col)
    inner = rest[1:-1].strip()
    values: dict[str, float | int] = {}
    if inner:
        for part in inner.split(","):
            if ":" not in part:
                raise ParseError(f"malformed entry {part.strip()!r} in {tag} mapping",
                                 line.num, base_col)
            key, _, val = part.partition(":")
            key = key.strip()
            if key not in keys:
                raise ParseError(f"unexpected key {key!r} in {tag} mapping (allowed: "
                                 f"{', '.join(keys)})", line.num, base_col)
            if key in values:
                raise ParseError(f"duplicate key {key!r} in {tag} mapping", line.num, base_col)
            values[key] = _parse_number(val, line.num, base_col, want_int=want_int)
    missing = [k for k in keys if k not in values]
    if missing:
        raise ParseError(f"{tag} mapping missing key(s) {', '.join(missing)}",
                         line.num, base_col)
    return values


class _Parser:
    def __init__(self, lines: list[_Line]):
        self.lines = lines
        self.i = 0

    def peek(self) -> _Line | None:
        return self.lines[self.i] if self.i < len(self.lines) else None

    def advance(self) -> _Line:
        line = self.lines[self.i]
        self.i += 1
        return line

    # -- flow sequences ----------------------------------------------------

    def _flow_list(self, first: str, line: _Line, *, want_int: bool) -> tuple[float, ...]:
        # May continue over following lines until brackets balance.
        text = first
        start = line
        while text.count("[") > text.count("]"):
            nxt = self.peek()
            if nxt is None:
                raise ParseError("unterminated flow sequence", start.num, start.indent + 1)
            self.advance()
            text += " " + nxt.text
        if not (text.startswith("[") and text.endswith("]")):
            raise ParseError(f"expected a [...] sequence, got {first!r}",
                             start.num, start.indent + 1)
        inner = text[1:-1].strip()
        if not inner:
            return ()
        out = []
        for tok in inner.split(","):
            if not tok.strip():
                raise ParseError("empty entry in flow sequence", start.num, start.indent + 1)
            out.append(_parse_number(tok, start.num, start.indent + 1, want_int=want_int))
        return tuple(out)

    # -- block structure ---------------------------------------------------

    def _skip_block(self, indent: int) -> None:
        """Skip every following line indented deeper than `indent`."""
        while (line := self.peek()) is not None and line.indent > indent:
            self.advance()

    def _split_key(self, line: _Line) -> tuple[str, str]:
        m = _KEY_RE.match(line.text)
        if not m:
            raise ParseError(f"expected 'key:' mapping entry, got {line.text!r}",
                             line.num, line.indent + 1)
        return m.group(1), line.text[m.end():].strip()

    def parse_document(self) -> ArenaConfigDoc:
        line = self.peek()
        if line is None:
            raise ParseError("empty document", 1, 1, expected_tag=DOC_TAG)
        if line.text != DOC_TAG or line.indent != 0:
            raise ParseError(f"document must start with {DOC_TAG}", line.num,
                             line.indent + 1, expected_tag=DOC_TAG)
        self.advance()
        arenas: dict[int, ArenaSpec] = {}
        seen_arenas = False
        while (line := self.peek()) is not None:
            if line.indent != 0:
                raise ParseError("unexpected indent at document level", line.num,
                                 line.indent + 1)
            key, rest = self._split_key(line)
            self.advance()
            if key == "arenas":
                if seen_arenas:
                    raise ParseError("duplicate key 'arenas'", line.num, 1)
                seen_arenas = True
                if rest == "{}":
                    continue
                if rest:
                    raise ParseError(f"unexpected inline value {rest!r} for 'arenas'",
                                     line.num, 1)
                self._parse_arena_entries(line.indent, arenas)
            else:
                # Unknown top-level key: skip its block, remember nothing
                # (the document type has no slot for it; arena/item level
                # unknowns are the ones surfaced as warnings).
                self._skip_block(line.indent)
        if not seen_arenas:
            last = self.lines[-1] if self.lines else None
            raise ParseError("missing 'arenas' mapping", last.num if last else 1, 1)
        return ArenaConfigDoc(arenas=arenas)

    def _parse_arena_entries(self, parent_indent: int, arenas: dict[int, ArenaSpec]) -> None:
        entry_indent: int | None = None
        while (line := self.peek()) is not None and line.indent > parent_indent:
            if entry_indent is None:
                entry_indent = line.indent
            elif line.indent != entry_indent:
                raise ParseError("inconsistent indentation in 'arenas' mapping",
                                 line.num, line.indent + 1)
            key, rest = self._split_key(line)
            if not _INT_RE.match(key) or int(key) < 0:
                raise ParseError(f"arena index must be a non-negative integer, got {key!r}",
                                 line.num, line.indent + 1)
            index = int(key)
            if index in arenas:
                raise ParseError(f"duplicate arena index {index}", line.num, line.indent + 1)
            if rest != ARENA_TAG:
                got = rest or "(nothing)"
                raise ParseError(f"arena {index} must be tagged, got {got!r}",
                                 line.num, line.indent + len(key) + 3,
                                 expected_tag=ARENA_TAG)
            self.advance()
            arenas[index] = self._parse_arena_body(line.indent)

    def _parse_arena_body(self, parent_indent: int) -> ArenaSpec:
        t = 0
        blackouts: tuple[int, ...] = ()
        items: tuple[ItemSpec, ...] = ()
        unknown: list[str] = []
        seen: set[str] = set()
        body_indent: int | None = None
        while (line := self.peek()) is not None and line.indent > parent_indent:
            if body_indent is None:
                body_indent = line.indent
            elif line.indent != body_indent:
                raise ParseError("inconsistent indentation in arena body",
                                 line.num, line.indent + 1)
            key, rest = self._split_key(line)
            if key in seen:
                raise ParseError(f"duplicate key {key!r}", line.num, line.indent + 1)
            seen.add(key)
            self.advance()
            if key == "t":
                t = int(_parse_number(rest, line.num, line.indent + 1, want_int=True))
            elif key == "blackouts":
                raw = self._flow_list(rest, line, want_int=True)
                blackouts = tuple(int(v) for v in raw)
            elif key == "items":
                if rest:
                    raise ParseError(f"unexpected inline value {rest!r} for 'items'",
                                     line.num, line.indent + 1)
                items = self._parse_items(line.indent)
            else:
                unknown.append(key)
                self._skip_block(line.indent)
        return ArenaSpec(t=t, blackouts=blackouts, items=items, unknown_keys=tuple(unknown))

    def _parse_items(self, key_indent: int) -> tuple[ItemSpec, ...]:
        items: list[ItemSpec] = []
        entry_indent: int | None = None
        while (line := self.peek()) is not None:
            if not line.text.startswith("-") or line.indent < key_indent:
                break
            if entry_indent is None:
                entry_indent = line.indent
            elif line.indent != entry_indent:
                break
            body = line.text[1:].strip()
            self.advance()
            if body == "...":
                continue  # elision shorthand, see module docstring
            if body != ITEM_TAG:
                got = body.split()[0] if body.split() else "(nothing)"
                raise ParseError(f"sequence entry must be {ITEM_TAG}, got {got!r}",
                                 line.num, line.indent + 3, expected_tag=ITEM_TAG)
            items.append(self._parse_item_body(line.indent))
        return tuple(items)

    def _parse_item_body(self, dash_indent: int) -> ItemSpec:
        name: str | None = None
        name_line = 0
        positions: tuple[Vec3, ...] = ()
        rotations: tuple[float, ...] = ()
        colors: tuple[Rgb, ...] = ()
        sizes: tuple[Vec3, ...] = ()
        unknown: list[str] = []
        seen: set[str] = set()
        body_indent: int | None = None
        while (line := self.peek()) is not None and line.indent > dash_indent:
            if line.text.startswith("- "):
                break  # next sequence entry at deeper indent would be a new list
            if body_indent is None:
                body_indent = line.indent
            elif line.indent != body_indent:
                raise ParseError("inconsistent indentation in item body",
                                 line.num, line.indent + 1)
            key, rest = self._split_key(line)
            if key in seen:
                raise ParseError(f"duplicate key {key!r}", line.num, line.indent + 1)
            seen.add(key)
            self.advance()
            if key == "name":
                if not _IDENT_RE.match(rest):
                    raise ParseError(f"item name must be an identifier, got {rest!r}",
                                     line.num, line.indent + 1)
                name = rest
                name_line = line.num
            elif key in ("positions", "sizes"):
                if rest:
                    raise ParseError(f"unexpected inline value for {key!r}",
                                     line.num, line.indent + 1)
                vecs = self._parse_tagged_seq(line.indent, VEC_TAG, ("x", "y", "z"),
                                              want_int=False)
                value = tuple(Vec3(v["x"], v["y"], v["z"]) for v in vecs)
                if key == "positions":
                    positions = value
                else:
                    sizes = value
            elif key == "colors":
                maps = self._parse_tagged_seq(line.indent, RGB_TAG, ("r", "g", "b"),
                                              want_int=True)
                colors = tuple(Rgb(int(m["r"]), int(m["g"]), int(m["b"])) for m in maps)
            elif key == "rotations":
                rotations = tuple(float(v) for v in
                                  self._flow_list(rest, line, want_int=False))
            else:
                unknown.append(key)
                self._skip_block(line.indent)
        if name is None:
            ref = self.lines[self.i - 1] if self.i else None
            raise ParseError("item is missing 'name'", ref.num if ref else name_line or 1, 1)
        return ItemSpec(name=name, positions=positions, rotations=rotations,
                        colors=colors, sizes=sizes, unknown_keys=tuple(unknown))

    def _parse_tagged_seq(self, key_indent: int, tag: str, keys: tuple[str, ...],
                          *, want_int: bool) -> list[dict[str, float | int]]:
        out: list[dict[str, float | int]] = []
        entry_indent: int | None = None
        while (line := self.peek()) is not None:
            if not line.text.startswith("-") or line.indent < key_indent:
                break
            if entry_indent is None:
                entry_indent = line.indent
            elif line.indent != entry_indent:
                break
            body = line.text[1:].strip()
            self.advance()
            if body == "...":
                continue
            out.append(_parse_flow_map(tag, body, line, keys, want_int=want_int))
        return out


def parse_config(text: str) -> ArenaConfigDoc:
    """Parse config text into a document, raising ParseError on bad syntax."""
    parser = _Parser(_scan(text))
    return parser.parse_document()


def _fmt(value: float) -> str:
    if isinstance(value, int) or value == int(value):
        return str(int(value))
    return repr(value)


def serialize_config(doc: ArenaConfigDoc) -> str:
    """Write a document in canonical form.

    Canonical means: sorted arena indices, item fields in the order
    name/positions/rotations/colors/sizes, zero/empty fields omitted, flow
    lists single-line. parse_config(serialize_config(doc)) == doc.
    """
    out: list[str] = [DOC_TAG]
    if not doc.arenas:
        out.append("arenas: {}")
        return "\n".join(out) + "\n"
    out.append("arenas:")
    for index in sorted(doc.arenas):
        arena = doc.arenas[index]
        out.append(f"  {index}: {ARENA_TAG}")
        if arena.t:
            out.append(f"    t: {arena.t}")
        if arena.blackouts:
            out.append("    blackouts: [" + ", ".join(str(b) for b in arena.blackouts) + "]")
        if arena.items:
            out.append("    items:")
            for item in arena.items:
                out.append(f"    - {ITEM_TAG}")
                out.append(f"      name: {item.name}")
                if item.positions:
                    out.append("      positions:")
                    for v in item.positions:
                        out.append(f"      - {VEC_TAG} "
                                   f"{{x: {_fmt(v.x)}, y: {_fmt(v.y)}, z: {_fmt(v.z)}}}")
                if item.rotations:
                    out.append("      rotations: ["
                               + ", ".join(_fmt(r) for r in item.rotations) + "]")
                if item.colors:
                    out.append("      colors:")
                    for c in item.colors:
                        out.append(f"      - {RGB_TAG} {{r: {c.r}, g: {c.g}, b: {c.b}}}")
                if item.sizes:
                    out.append("      sizes:")
                    for v in item.sizes:
                        out.append(f"      - {VEC_TAG} "
                                   f"{{x: {_fmt(v.x)}, y: {_fmt(v.y)}, z: {_fmt(v.z)}}}")
    return "\n".join(out) + "\n"


def load_config(path: str) -> ArenaConfigDoc:
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read())


def save_config(doc: ArenaConfigDoc, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(serialize_config(doc))
