"""Endpoints package."""
