"""Run configuration tests."""
