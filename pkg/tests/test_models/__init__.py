"""Model registry, classifier and accounting tests."""
