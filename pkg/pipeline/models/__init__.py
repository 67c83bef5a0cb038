"""
Models package for experiment configuration and run reports.
"""
