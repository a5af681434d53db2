"""Non-CMC surfaces with parallel normalized mean curvature that are
biconservative in the hyperbolic space H^4, built in the hyperboloid model
inside Minkowski space R^5_1 and checked by finite differences."""

__version__ = "0.1.0"
