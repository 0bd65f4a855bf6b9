"""gemcat: catalogues, moves and invariants for edge-coloured graphs
encoding closed 3-manifolds."""

__version__ = "0.1.0"
