"""Sampling-based predictive control for quadruped locomotion on a single rigid body model."""

__version__ = "0.1.0"
