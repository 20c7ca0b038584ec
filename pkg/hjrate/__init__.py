"""
hjrate: regularización por sup/inf-convolución y verificación de tasas de
viscosidad evanescente para ecuaciones de Hamilton-Jacobi.
"""

__version__ = "1.0.0"
