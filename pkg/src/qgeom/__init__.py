"""Voronoi geometry of quantum state space and qubit Holevo capacity estimation."""

__version__ = "0.1.0"

from qgeom._backend import BACKEND

__all__ = ["BACKEND", "__version__"]
