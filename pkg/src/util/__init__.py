"""Util package."""
