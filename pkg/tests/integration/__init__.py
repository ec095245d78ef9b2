"""
Integration tests for the linear loop ANT analyzer.
Tests components with external dependencies or interactions between components.
"""
