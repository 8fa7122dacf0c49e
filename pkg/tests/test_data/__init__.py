"""Dataset decoding and batching tests."""
