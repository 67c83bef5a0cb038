"""Tests for the cognitive radio spectrum sensing toolkit."""
