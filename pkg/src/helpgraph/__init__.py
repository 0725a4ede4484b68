"""Graph-regularized semi-supervised domain classification on user-domain graphs."""

__version__ = "0.1.0"
