"""
delaysim: mild-solution simulator for parabolic equations with discrete and
distributed state-dependent delays.
"""
__version__ = '0.1.0'
