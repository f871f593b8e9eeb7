"""
Utility modules for the tournament designer.
"""
