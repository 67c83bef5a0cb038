"""Utilities package for experiment output."""
