"""
Test suite for toric-geodesics

Run tests with:
    python -m pytest tests/
    python -m pytest -m "not slow"
"""
