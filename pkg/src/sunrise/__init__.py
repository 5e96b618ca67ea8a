"""Ensemble off-policy reinforcement learning with weighted Bellman backups."""

__version__ = "0.1.0"
