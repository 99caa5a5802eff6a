"""
Test Package for the Push-Recovery Toolkit

Run tests with:
    pytest tests/ -v
"""
