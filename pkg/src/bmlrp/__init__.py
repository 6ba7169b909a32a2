"""Multi-level prefix routing over static wireless topologies.

Modules: ``idspace`` (ids, prefixes, colours), ``topology`` (physical
networks), ``levels`` (tables), ``propagation`` (per-level convergence),
``ascent`` (neighbour selection and the level build), ``router``,
``oracle`` (brute-force references and fixtures) and ``experiments``.
"""

__version__ = "0.1.0"
