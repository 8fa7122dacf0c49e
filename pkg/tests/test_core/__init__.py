"""Tensor, kernel and gradient-check tests."""
