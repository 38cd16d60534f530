"""
soficlab Test Suite

This package contains the tests for soficlab:
- unit/: Unit tests for individual modules
- integration/: Runner, recipe and CLI tests writing real reports
- e2e/: Acceptance tests for complete workflows
"""
