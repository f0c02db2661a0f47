"""Test package for stratk."""
