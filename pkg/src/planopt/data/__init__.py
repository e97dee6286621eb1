"""Bundled scenario files for the two demonstration studies."""
