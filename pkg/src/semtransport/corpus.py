"""Synthetic desktop UI snapshots.

Snapshots are grown node by node until the compact text reaches a byte
budget (or a node count), so corpus sizes can be controlled directly. The
default budget band keeps hybrid payloads for a 1080p screen between roughly
3.4 KB and 4.9 KB.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .screen_repr import ScreenSnapshot, Source, UiNode, format_line

DEFAULT_TEXT_BUDGET = (2500, 4000)
OCR_TEXT_BUDGET = (1000, 3000)
OCR_ENCODE_MS = (20.0, 50.0)
REFERENCE_TEXT_BUDGET = 2500
# the default corpus; its median hybrid size is the profile's hybrid_1080p
DEFAULT_CORPUS_SIZE = 200
DEFAULT_CORPUS_SEED = 1

_MENUS = ["File", "Edit", "View", "Insert", "Format", "Tools", "Window", "Help", "History", "Bookmarks"]
_BUTTONS = ["Back", "Forward", "Reload", "Save", "Open", "Share", "Undo", "Redo", "Print", "New",
            "Delete", "Archive", "Reply", "Send", "Cancel", "OK", "Apply", "Search", "Filter", "Sort"]
_ITEMS = ["Inbox", "Drafts", "Sent", "Spam", "Trash", "Projects", "Notes", "Invoices", "Photos",
          "Downloads", "Documents", "Desktop", "Music", "Q3 report.xlsx", "budget.csv", "README.md",
          "Team sync", "Roadmap", "Travel", "Receipts"]
_WORDS = ["account", "settings", "update", "available", "name", "email", "address", "password",
          "total", "due", "date", "amount", "status", "pending", "approved", "order", "number",
          "profile", "privacy", "notifications", "enable", "weekly", "summary", "last", "modified",
          "size", "owner", "shared", "with", "you", "results", "page", "next", "previous", "city",
          "phone", "company", "title", "description", "price", "quantity", "subtotal", "tax"]
_FIELDS = ["First name", "Last name", "Email", "Phone", "Street", "City", "ZIP", "Company",
           "Card number", "Expiry", "Amount", "Subject", "Search mail", "Username"]

_ROLE_ACTIONS = {
    "button": ("click",),
    "menuitem": ("click",),
    "listitem": ("select",),
    "tab": ("select",),
    "link": ("click",),
    "textfield": ("type", "focus"),
    "checkbox": ("toggle",),
    "combobox": ("click", "select"),
    "text": (),
    "heading": (),
    "image": (),
    "separator": (),
}


@dataclass
class _Draft:
    id: int
    role: str
    label: str
    x: int
    y: int
    w: int
    h: int
    actions: tuple[str, ...] = ()
    states: tuple[str, ...] = ()
    children: list[_Draft] = field(default_factory=list)
    # flow-layout cursor for children
    cx: int = 0
    cy: int = 0

    def freeze(self) -> UiNode:
        return UiNode(self.id, self.role, self.label, self.x, self.y, self.w, self.h,
                      self.actions, self.states, tuple(c.freeze() for c in self.children))

    def line_bytes(self) -> int:
        return len(format_line(self).encode("utf-8"))


def _sentence(rng: random.Random, lo: int, hi: int) -> str:
    words = rng.sample(_WORDS, rng.randint(lo, hi))
    return " ".join(words).capitalize()


class _Builder:
    def __init__(self, rng: random.Random, width: int, height: int):
        self.rng = rng
        self.width = width
        self.height = height
        self.next_id = 0
        self.text_bytes = -1  # no separator before the first line
        self.count = 0

    def add(self, parent: _Draft | None, role: str, label: str, x: int, y: int, w: int, h: int,
            actions: tuple[str, ...] = (), states: tuple[str, ...] = ()) -> _Draft:
        node = _Draft(self.next_id, role, label, x, y, w, h, actions, states, cx=x + 4, cy=y + 4)
        self.next_id += 1
        self.count += 1
        self.text_bytes += node.line_bytes() + 1
        if parent is not None:
            parent.children.append(node)
        return node

    def place(self, parent: _Draft, w: int, h: int, horizontal: bool) -> tuple[int, int]:
        """Flow layout inside ``parent``; wraps when the row/column is full."""
        x, y = parent.cx, parent.cy
        if horizontal:
            if x + w > parent.x + parent.w:
                x, y = parent.x + 4, y + h + 4
            parent.cx, parent.cy = x + w + 4, y
        else:
            if y + h > parent.y + parent.h:
                x, y = x + w + 8, parent.y + 4
            parent.cx, parent.cy = x, y + h + 2
        return x, y

    def leaf(self, parent: _Draft, kind: str) -> _Draft:
        rng = self.rng
        if kind == "menu":
            label = rng.choice(_MENUS)
            x, y = self.place(parent, 8 * len(label) + 16, 22, True)
            return self.add(parent, "menuitem", label, x, y, 8 * len(label) + 16, 22, ("click",))
        if kind == "toolbar":
            role = rng.choice(["button", "button", "button", "tab", "combobox"])
            label = rng.choice(_BUTTONS)
            w = 32 if role == "button" and rng.random() < 0.5 else 9 * len(label) + 20
            x, y = self.place(parent, w, 32, True)
            states = ("disabled",) if rng.random() < 0.08 else ()
            return self.add(parent, role, label, x, y, w, 32, _ROLE_ACTIONS[role], states)
        if kind == "sidebar":
            label = rng.choice(_ITEMS)
            if rng.random() < 0.15:
                label += f" ({rng.randint(1, 99)})"
            x, y = self.place(parent, parent.w - 8, 24, False)
            states = ("selected",) if rng.random() < 0.05 else ()
            return self.add(parent, "listitem", label, x, y, parent.w - 8, 24, ("select",), states)
        if kind == "table":
            row = parent.children[-1] if parent.children else None
            if row is None or len(row.children) >= 4:
                x, y = self.place(parent, parent.w - 8, 22, False)
                return self.add(parent, "row", "", x, y, parent.w - 8, 22)
            label = rng.choice([f"{rng.uniform(0, 999):.2f}", str(rng.randint(1, 9999)), rng.choice(_WORDS)])
            x, y = self.place(row, 120, 18, True)
            return self.add(row, "cell", label, x, y, 120, 18)
        if kind == "status":
            label = _sentence(rng, 1, 3)
            w = 7 * len(label)
            x, y = self.place(parent, w, 18, True)
            return self.add(parent, "text", label, x, y, w, 18)
        # main content
        role = rng.choices(
            ["text", "heading", "textfield", "checkbox", "link", "button", "image", "combobox",
             "separator"],
            weights=[28, 6, 14, 8, 12, 12, 8, 4, 4],
        )[0]
        if role == "text":
            label = _sentence(rng, 1, 3)
        elif role == "separator":
            label = ""
        elif role == "heading":
            label = _sentence(rng, 1, 3)
        elif role == "textfield":
            label = rng.choice(_FIELDS)
        elif role == "image":
            label = rng.choice(["", "logo", "avatar", "chart", "thumbnail"])
        elif role in ("button", "combobox"):
            label = rng.choice(_BUTTONS)
        else:
            label = _sentence(rng, 1, 2)
        w = min(parent.w - 8, max(40, 8 * len(label) + 24))
        h = {"heading": 32, "textfield": 28, "image": 96, "separator": 1}.get(role, 22)
        x, y = self.place(parent, w, h, False)
        states: tuple[str, ...] = ()
        r = rng.random()
        if role == "checkbox" and r < 0.4:
            states = ("checked",)
        elif role == "textfield" and r < 0.1:
            states = ("focused",)
        return self.add(parent, role, label, x, y, w, h, _ROLE_ACTIONS[role], states)


def _desktop(rng: random.Random, width: int, height: int, stop) -> UiNode:
    b = _Builder(rng, width, height)
    app = rng.choice(["Mail", "Files", "Browser", "Spreadsheet", "Settings", "Calendar", "Editor"])
    root = b.add(None, "window", f"{app} - {rng.choice(_ITEMS)}", 0, 0, width, height)
    menubar = b.add(root, "menubar", "", 0, 0, width, 24)
    toolbar = b.add(root, "toolbar", "", 0, 24, width, 40)
    sidebar = b.add(root, "list", "Folders", 0, 64, 240, height - 88)
    content = b.add(root, "group", "Main", 240, 64, width - 240, (height - 88) // 2)
    table = b.add(root, "table", "", 240, 64 + (height - 88) // 2, width - 240, (height - 88) // 2)
    status = b.add(root, "statusbar", "", 0, height - 24, width, 24)
    containers = [(menubar, "menu", 1), (toolbar, "toolbar", 2), (sidebar, "sidebar", 2),
                  (content, "content", 5), (table, "table", 8), (status, "status", 1)]
    caps = {"menu": 10, "toolbar": 18, "sidebar": 14, "status": 4}
    while not stop(b):
        open_ = [(p, k, wt) for p, k, wt in containers if len(p.children) < caps.get(k, 10**6)]
        parent, kind, _ = rng.choices(open_, weights=[wt for *_, wt in open_])[0]
        b.leaf(parent, kind)
    return root.freeze()


def _ocr(rng: random.Random, width: int, height: int, stop) -> UiNode:
    b = _Builder(rng, width, height)
    root = b.add(None, "screen", "", 0, 0, width, height)
    root.cx, root.cy = 16, 16
    while not stop(b):
        label = _sentence(rng, 1, 6)
        w = 9 * len(label)
        x, y = b.place(root, w, 20, False)
        b.add(root, "text", label, x, y, w, 20)
    return root.freeze()


def generate_snapshot(
    rng: random.Random,
    *,
    width: int = 1920,
    height: int = 1080,
    source: Source = Source.ACCESSIBILITY_TREE,
    text_budget: int | None = None,
    n_nodes: int | None = None,
) -> ScreenSnapshot:
    """Build one snapshot. Give either a compact-text byte budget or a node count."""
    if (text_budget is None) == (n_nodes is None):
        raise ValueError("give exactly one of text_budget or n_nodes")
    if text_budget is not None:
        stop = lambda b: b.text_bytes >= text_budget  # noqa: E731
    else:
        stop = lambda b: b.count >= n_nodes  # noqa: E731
    source = Source(source)
    if source is Source.OCR:
        root = _ocr(rng, width, height, stop)
        ocr_ms = round(rng.uniform(*OCR_ENCODE_MS), 3)
        return ScreenSnapshot(width, height, root, Source.OCR, ocr_ms)
    return ScreenSnapshot(width, height, _desktop(rng, width, height, stop))


def generate_corpus(
    count: int = DEFAULT_CORPUS_SIZE,
    seed: int = DEFAULT_CORPUS_SEED,
    *,
    width: int = 1920,
    height: int = 1080,
    source: Source = Source.ACCESSIBILITY_TREE,
    text_budget: tuple[int, int] | None = None,
) -> list[ScreenSnapshot]:
    source = Source(source)
    if text_budget is None:
        text_budget = OCR_TEXT_BUDGET if source is Source.OCR else DEFAULT_TEXT_BUDGET
    rng = random.Random(seed)
    return [
        generate_snapshot(rng, width=width, height=height, source=source,
                          text_budget=rng.randint(*text_budget))
        for _ in range(count)
    ]


def reference_snapshot(seed: int = 0) -> ScreenSnapshot:
    """The 1080p desktop screen used for latency figures (about 3.4 KB hybrid)."""
    return generate_snapshot(random.Random(seed), text_budget=REFERENCE_TEXT_BUDGET)
