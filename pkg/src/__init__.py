"""CCT Engine - compact transformers for image classification on a numpy autodiff core."""

__version__ = "1.0.0"
