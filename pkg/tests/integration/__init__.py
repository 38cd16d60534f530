"""
Integration Tests

Tests for the experiment runner, the recipes and the command line.
These tests write reports into temporary directories.
"""
