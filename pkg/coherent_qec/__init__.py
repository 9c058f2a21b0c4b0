# coherent_qec/__init__.py
"""
Fermionic-Gaussian simulation of repetition-code and surface-code error
correction under coherent X-type noise.
"""

__version__ = "1.0.0"
