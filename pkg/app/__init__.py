"""
Relaxometer

Secular Bloch-Redfield dynamics, concurrence and entropy of two Ising-coupled qubits
in independent or common ohmic baths.
"""

__version__ = "0.1.0"
