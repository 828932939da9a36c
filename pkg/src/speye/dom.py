"""A small static DOM built on the stdlib HTML parser.

Just enough tree to support the login-page heuristics: element tags,
attributes, text nodes, ancestor/descendant walks and stable node paths.
Parsing never executes scripts and never mutates the input.
"""

from __future__ import annotations

from html.parser import HTMLParser

VOID_ELEMENTS = {
    "area",
    "base",
    "br",
    "col",
    "embed",
    "hr",
    "img",
    "input",
    "link",
    "meta",
    "param",
    "source",
    "track",
    "wbr",
}


class HtmlElement:
    """One element node; ``children`` holds elements and raw text strings."""

    __slots__ = ("tag", "attrs", "parent", "children")

    def __init__(self, tag: str, attrs: dict[str, str], parent: "HtmlElement | None"):
        self.tag = tag
        self.attrs = attrs
        self.parent = parent
        self.children: list[HtmlElement | str] = []

    def get(self, name: str, default: str | None = None) -> str | None:
        return self.attrs.get(name, default)

    def own_text(self) -> str:
        """Text directly inside this element, excluding descendants."""
        return "".join(c for c in self.children if isinstance(c, str))

    def text(self) -> str:
        """All descendant text in document order."""
        parts: list[str] = []
        for child in self.children:
            if isinstance(child, str):
                parts.append(child)
            else:
                parts.append(child.text())
        return "".join(parts)

    def iter_elements(self):
        """This element and every descendant element, in document order."""
        yield self
        for child in self.children:
            if isinstance(child, HtmlElement):
                yield from child.iter_elements()

    def ancestors(self):
        node = self.parent
        while node is not None:
            yield node
            node = node.parent

    def find_all(self, tag: str) -> list["HtmlElement"]:
        return [n for n in self.iter_elements() if n.tag == tag]

    def child_elements(self) -> list["HtmlElement"]:
        return [c for c in self.children if isinstance(c, HtmlElement)]

    def __repr__(self) -> str:
        return f"<HtmlElement {self.tag} {self.attrs}>"


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = HtmlElement("#document", {}, None)
        self._stack = [self.root]

    def _attach(self, tag: str, attrs) -> HtmlElement:
        attr_map: dict[str, str] = {}
        for name, value in attrs:
            attr_map.setdefault(name.lower(), value if value is not None else "")
        node = HtmlElement(tag.lower(), attr_map, self._stack[-1])
        self._stack[-1].children.append(node)
        return node

    def handle_starttag(self, tag, attrs):
        node = self._attach(tag, attrs)
        if tag.lower() not in VOID_ELEMENTS:
            self._stack.append(node)

    def handle_startendtag(self, tag, attrs):
        self._attach(tag, attrs)

    def handle_endtag(self, tag):
        tag = tag.lower()
        # Tolerant close: pop to the nearest matching open tag, ignore strays.
        for i in range(len(self._stack) - 1, 0, -1):
            if self._stack[i].tag == tag:
                del self._stack[i:]
                return

    def handle_data(self, data):
        if data:
            self._stack[-1].children.append(data)


def parse_html(text: str) -> HtmlElement:
    """Parse HTML text into a document root node (tag ``#document``)."""
    builder = _TreeBuilder()
    builder.feed(text)
    builder.close()
    return builder.root


def node_path(node: HtmlElement) -> str:
    """Serialized position of a node, unique within its document.

    The path uses 1-based indices among same-tag element siblings, e.g.
    ``/html[1]/body[1]/div[2]/a[1]``.
    """
    steps: list[str] = []
    current = node
    while current.parent is not None:
        same_tag = [c for c in current.parent.child_elements() if c.tag == current.tag]
        steps.append(f"{current.tag}[{same_tag.index(current) + 1}]")
        current = current.parent
    return "/" + "/".join(reversed(steps))


def resolve_path(root: HtmlElement, path: str) -> HtmlElement | None:
    """Resolve a :func:`node_path` string back to its node, or None."""
    node = root
    for step in path.strip("/").split("/"):
        if not step:
            return None
        tag, _, index = step.partition("[")
        try:
            position = int(index.rstrip("]")) - 1
        except ValueError:
            return None
        matches = [c for c in node.child_elements() if c.tag == tag]
        if position < 0 or position >= len(matches):
            return None
        node = matches[position]
    return node


def document_base_url(root: HtmlElement, fetched_url: str) -> str:
    """The URL against which relative references resolve: the first
    ``<base href>`` if present, otherwise the fetched URL."""
    for base in root.find_all("base"):
        href = base.get("href")
        if href:
            return href
    return fetched_url
