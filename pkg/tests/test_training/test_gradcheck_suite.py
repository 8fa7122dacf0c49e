"""Tests for the gradient-check suite."""

import numpy as np

from src.core import ops
from src.core.errors import ConfigError
from src.core.tensor import Tensor
from src.training.gradcheck_suite import (
    GradCheckCase,
    default_cases,
    format_table,
    run_case,
    run_suite,
)


class TestGradCheckSuite:

    def test_default_suite_passes(self):
        outcomes = run_suite()
        failed = [(o.name, o.error) for o in outcomes if not o.passed]
        assert failed == []

    def test_case_names_unique(self):
        names = [case.name for case in default_cases()]
        assert len(names) == len(set(names))
        assert {"gelu", "conv2d", "maxpool2d", "seqpool", "cct-2/3x2"} <= set(names)

    def test_broken_backward_fails(self, monkeypatch):
        monkeypatch.setattr(ops, "_gelu_backward", lambda x, g: g)
        gelu = next(case for case in default_cases() if case.name == "gelu")
        outcome = run_case(gelu)
        assert not outcome.passed
        assert outcome.error > outcome.tolerance

    def test_construction_error_is_a_failure(self):
        def build(rng):
            raise ConfigError("no such layer")

        outcome = run_case(GradCheckCase("broken", build))
        assert not outcome.passed
        assert outcome.error == float("inf")
        assert "no such layer" in outcome.message

    def test_table_lists_status(self):
        case = GradCheckCase("square", lambda rng: (lambda t: (t * t).sum(), Tensor(rng.normal(size=3))))
        table = format_table(run_suite([case]))
        assert "square" in table and "PASS" in table
