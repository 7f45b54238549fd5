"""Variational analysis of nonlinear algebraic systems A u = lambda f(u)."""
