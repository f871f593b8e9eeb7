"""
Quadrature and beta-kernel evaluation.
"""
