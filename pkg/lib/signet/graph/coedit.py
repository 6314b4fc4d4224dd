"""
Building a signed co-edit graph of users from a log of page edits.

Each edit is either reverted or not. A user's category on a page is
"revert" if any of their edits to that page was reverted. Two users who
edited common pages are joined by a positive edge when most of their shared
pages have them in the same category, and by a negative edge when most have
them in different categories; an exact tie adds no edge.

>>> records = [
...     EditRecord.make("ann", "Apple", False),
...     EditRecord.make("bob", "Apple", False),
...     EditRecord.make("cat", "Apple", True),
...     EditRecord.make("dan", "Talk:Apple", False),
... ]
>>> g = build_coedit_graph(records)
>>> g.names
('ann', 'bob', 'cat')
>>> list(g.edges())
[(0, 1, 1), (0, 2, -1), (1, 2, -1)]
"""

import logging
from collections import namedtuple
from itertools import combinations

from signet.graph import (
    EmptyGraphError,
    SignedGraph,
)

log = logging.getLogger(__name__)

META_PREFIXES = ("User:", "Talk:", "User talk:", "Wikipedia:")


class EditRecord(namedtuple("EditRecord", "user page_title reverted")):
    """One edit of `page_title` by `user`, and whether it was reverted."""

    __slots__ = ()

    @classmethod
    def make(cls, user, page_title, reverted):
        if not page_title:
            raise ValueError("Edit record has an empty page title")
        return cls(user, page_title, bool(reverted))


def is_meta_page(title):
    return title.startswith(META_PREFIXES)


def edit_categories(records):
    """
    Collapse edits to `{page: {user: reverted}}`, dropping meta pages. Users
    and pages keep their order of first appearance.
    """
    pages = {}
    dropped = 0
    for record in records:
        if is_meta_page(record.page_title):
            dropped += 1
            continue
        editors = pages.setdefault(record.page_title, {})
        editors[record.user] = editors.get(record.user, False) or record.reverted
    if dropped:
        log.info("dropped %d edits on meta pages", dropped)
    return pages


def build_coedit_graph(records):
    records = list(records)
    if not records:
        raise EmptyGraphError("No edit records given")
    pages = edit_categories(records)
    order = {}
    for editors in pages.values():
        for user in editors:
            order.setdefault(user, len(order))
    # (a, b) -> [same category pages, different category pages]
    counts = {}
    for editors in pages.values():
        users = sorted(editors, key=order.__getitem__)
        for a, b in combinations(users, 2):
            tally = counts.setdefault((order[a], order[b]), [0, 0])
            tally[0 if editors[a] == editors[b] else 1] += 1
    signs = {}
    for pair, (same, different) in counts.items():
        if same > different:
            signs[pair] = 1
        elif same < different:
            signs[pair] = -1
    connected = sorted({u for pair in signs for u in pair})
    if not connected:
        raise EmptyGraphError("Every user is isolated after building co-edit relations")
    new_id = {u: i for i, u in enumerate(connected)}
    names_by_old = {i: user for user, i in order.items()}
    names = [names_by_old[u] for u in connected]
    signs = {(new_id[a], new_id[b]): sign for (a, b), sign in signs.items()}
    log.info(
        "co-edit graph: %d of %d users connected, %d edges (%d tied pairs skipped)",
        len(connected),
        len(order),
        len(signs),
        len(counts) - len(signs),
    )
    return SignedGraph.from_sign_map(len(connected), signs, names=names)
