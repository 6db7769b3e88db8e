"""Automatic quality features for lecture videos and their correlation with human ratings."""

__version__ = "0.1.0"
