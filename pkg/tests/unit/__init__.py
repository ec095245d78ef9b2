"""
Unit tests for the linear loop ANT analyzer.
Tests individual components in isolation.
"""
