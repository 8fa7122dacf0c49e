"""Optimizer, schedule and loss tests."""
