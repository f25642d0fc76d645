"""Discrete fundamental groups of warped nets and box spaces."""

from __future__ import annotations

__version__ = "0.1.0"

