"""Multiparty random access codes: entanglement-assisted, classical and polyhedral QRAC protocols."""

__version__ = "0.1.0"
