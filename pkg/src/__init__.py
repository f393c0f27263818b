"""
GLMB-TBD
Labeled multi-object density algebra, delta-GLMB approximation and a
particle delta-GLMB tracker for radar track-before-detect.
"""
__version__ = "0.1.0"
