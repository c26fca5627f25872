"""Variational wave-mechanics checks and hydrogen level arithmetic."""
__version__ = "0.1.0"
