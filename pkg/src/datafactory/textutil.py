"""Small text helpers shared by the agent layer."""

from __future__ import annotations

import re
from typing import Optional, Sequence

_FENCE_RE = re.compile(r"```([A-Za-z0-9_+-]*)[ \t]*\n(.*?)```", re.DOTALL)


def extract_fenced(text: str, languages: Optional[Sequence[str]] = None) -> Optional[str]:
    """Return the first fenced code block, preferring matching language tags.

    With ``languages`` given, a block tagged with one of them wins; an
    untagged block is the fallback. Returns None when nothing matches.
    """
    untagged: Optional[str] = None
    wanted = {lang.lower() for lang in languages} if languages else None
    for match in _FENCE_RE.finditer(text):
        tag = match.group(1).lower()
        body = match.group(2).strip()
        if wanted is None or tag in wanted:
            return body
        if not tag and untagged is None:
            untagged = body
    return untagged


def truncate(text: str, limit: int) -> str:
    if len(text) <= limit:
        return text
    return text[: limit - 3] + "..."
