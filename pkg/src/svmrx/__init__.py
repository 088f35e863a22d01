"""Fading-channel receiver simulation: ML, pilot-aided and SVM receivers."""

__version__ = "0.1.0"
