"""Clients package."""
