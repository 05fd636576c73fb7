"""Finite-scale workbench for towers of finite groups and branch permutations."""

__version__ = "0.1.0"
