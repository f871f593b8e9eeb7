"""
Prize schedule solvers: numeric, closed-form and asymptotic.
"""
