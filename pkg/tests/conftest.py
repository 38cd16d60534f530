"""
Pytest configuration
"""

import sys
from pathlib import Path

# Add the project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))


def pytest_configure(config):
    """Configure pytest markers"""
    config.addinivalue_line(
        "markers", "unit: Unit tests (fast, no external dependencies)"
    )
    config.addinivalue_line(
        "markers", "integration: Integration tests (CLI, file formats, report writing)"
    )
    config.addinivalue_line(
        "markers", "e2e: End-to-end tests (acceptance values of the recipes)"
    )
    config.addinivalue_line(
        "markers", "slow: Slow tests (may take a minute or more)"
    )
