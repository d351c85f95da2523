"""Perceptual ad-blocking workbench.

Element-, frame- and page-based ad classifiers plus the adversarial attacks
that target them, all runnable offline on synthetic data.
"""

__version__ = "0.1.0"
