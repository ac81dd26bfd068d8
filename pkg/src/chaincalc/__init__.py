"""chaincalc: exact-arithmetic calculus of oriented polytope chains.

Subpackages are importable directly; nothing here is re-exported eagerly so
that the CLI starts fast and the dependency surface stays visible.
"""

__version__ = "0.1.0"
