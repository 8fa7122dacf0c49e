"""CCT Engine test suite."""
