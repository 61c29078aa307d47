"""Bending-handle geometry toolkit."""
