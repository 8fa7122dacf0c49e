"""Training loop, evaluation, sweep and CLI tests."""
