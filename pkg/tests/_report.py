"""Collects acceptance lines so the terminal summary can print them."""
LINES = []
