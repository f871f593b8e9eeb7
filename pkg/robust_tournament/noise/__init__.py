"""
Adversarial noise construction and distribution reconstruction.
"""
