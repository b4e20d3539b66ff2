"""Versioned prompt templates shipped as text assets.

Templates use ``{name}`` placeholders filled by :func:`render`; the
renderer only touches known placeholders so literal braces in schema
text or code samples survive.
"""

from __future__ import annotations

import re
from importlib import resources

_PLACEHOLDER_RE = re.compile(r"\{(\w+)\}")


def load_prompt(name: str) -> str:
    return resources.files(__package__).joinpath(f"{name}.txt").read_text(encoding="utf-8")


def render(template: str, **values: str) -> str:
    def fill(match: re.Match) -> str:
        key = match.group(1)
        return str(values[key]) if key in values else match.group(0)

    return _PLACEHOLDER_RE.sub(fill, template)
