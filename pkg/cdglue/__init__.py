# Curvature-dimension checks for glued weighted manifolds
__version__ = "0.1.0"
