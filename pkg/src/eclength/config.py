"""Run configuration shared by the test engine, the search driver and the CLI."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RunConfig:
    """Tolerances and knobs for EC tests and critical-length searches.

    tol_test is the zero/positivity tolerance of the positivity test (scaled
    per coefficient row); entries within a factor of 10 of it on either side
    are treated as undecidable rather than forced into a boolean.  tol_det is
    the relative threshold under which an endpoint determinant counts as zero.
    tol_dicho is the bracket width at which the dichotomy stops.  ell0_factor
    shrinks the guaranteed-safe section length pi/M below its upper bound.
    """

    tol_test: float = 1e-16
    tol_det: float = 1e-16
    tol_dicho: float = 1e-10
    ell0_factor: float = 0.95
    k_max: int = 64
    keep_levels: bool = False
    keep_trace: bool = True
    check_sections: bool = False
    deadband: float = 10.0
    output: str = "json"
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if not (self.tol_test > 0 and self.tol_det > 0 and self.tol_dicho > 0):
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.ell0_factor < 1.0:
            raise ValueError("ell0_factor must lie strictly inside (0, 1)")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if self.deadband < 1.0:
            raise ValueError("deadband multiplier must be >= 1")
