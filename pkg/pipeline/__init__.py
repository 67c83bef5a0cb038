"""Pipeline package for the cognitive radio sensing experiments."""
