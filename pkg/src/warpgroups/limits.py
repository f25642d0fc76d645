"""Resource caps with environment overrides.

Explicit arguments (from a config file or the CLI) always win; the environment
variables below are consulted only when no explicit value is given.

``WARPGROUPS_MAX_VERTICES``  vertex cap for nets and graphs (default 20000)
``WARPGROUPS_MAX_WORDS``     word enumeration cap (default 1000000)
``WARPGROUPS_MAX_CELLS``     2-cell enumeration cap (default 10000000)
"""

from __future__ import annotations

import os

DEFAULT_MAX_VERTICES = 20_000
DEFAULT_MAX_WORDS = 1_000_000
DEFAULT_MAX_CELLS = 10_000_000

ENV_NAMES = {
    "max_vertices": "WARPGROUPS_MAX_VERTICES",
    "max_words": "WARPGROUPS_MAX_WORDS",
    "max_cells": "WARPGROUPS_MAX_CELLS",
}

_DEFAULTS = {
    "max_vertices": DEFAULT_MAX_VERTICES,
    "max_words": DEFAULT_MAX_WORDS,
    "max_cells": DEFAULT_MAX_CELLS,
}


def resolve(name: str, value: int | None = None) -> int:
    """Return the effective cap called ``name``."""
    if value is not None:
        return int(value)
    raw = os.environ.get(ENV_NAMES[name])
    if raw:
        return int(raw)
    return _DEFAULTS[name]
