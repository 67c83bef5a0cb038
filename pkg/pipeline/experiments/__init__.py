"""Experiment stages, one per reproduced figure."""
