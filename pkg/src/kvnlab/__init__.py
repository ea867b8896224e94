"""Koopman-von Neumann classical mediators coupled to two qubits.

Continuous modes live on periodic lattices (hbar = 1); the classical particle
is encoded as ``x = x1``, ``p = p2`` with ``x2`` and ``p1`` hidden.
"""

__version__ = "0.1.0"
