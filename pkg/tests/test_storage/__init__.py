"""Checkpoint, metrics and report tests."""
