"""
Hexgas: FHP-I Lattice-Gas Cellular Automaton
============================================

Convenience alias for `hexgas_lattice`.

Usage:
------
    import hexgas
    table = hexgas.build_table()
    result = hexgas.run(hexgas.load_config("hole.cfg"))
"""

from __future__ import annotations

from typing import Any

import hexgas_lattice as _hexgas_lattice

__version__ = _hexgas_lattice.__version__


def __getattr__(name: str) -> Any:
    return getattr(_hexgas_lattice, name)


def __dir__() -> list[str]:
    return sorted(set(globals()) | set(dir(_hexgas_lattice)))


__all__ = [name for name in dir(_hexgas_lattice) if not name.startswith("_")]
