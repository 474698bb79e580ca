"""Noise channels acting on two-qubit states, and what they do to Bell-CHSH and steering criteria."""

__version__ = "0.1.0"
