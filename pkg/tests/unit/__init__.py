"""
Unit Tests

Tests for individual components and functions in isolation.
These tests are fast and need nothing beyond the package itself.
"""
