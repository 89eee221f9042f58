"""Numerical instability analysis of bound states for nonlinear Schroedinger models."""

from .core import DomainError, Grid, GridMismatchError, Model, ModelSpec, fold, unfold

__version__ = "0.1.0"
