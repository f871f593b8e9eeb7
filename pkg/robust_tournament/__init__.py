"""
Robust Tournament Designer
Computes prize schedules that maximize worst-case effort in rank-order
tournaments when only an entropy bound on the noise is known.
"""

__version__ = "1.0.0"
__author__ = "Tournament Design Team"
__description__ = "Max-min prize schedules, adversarial noise and tournament analytics"
