"""
Tests for the linear loop ANT analyzer.
"""
