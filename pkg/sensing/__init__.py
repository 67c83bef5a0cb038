"""Numerical core of the cognitive-radio spectrum sensing toolkit."""
