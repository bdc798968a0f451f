"""Reductions of the nonlinear wave equation box(u) = F(u) by the ansatz u = phi(y, z)."""

__version__ = "0.1.0"
