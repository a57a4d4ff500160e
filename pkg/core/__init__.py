"""
Core Domain Layer
Lattice entities, numerical use cases and the ports they depend on.
"""
