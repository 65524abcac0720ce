"""Finite-difference toolkit for the prescribed Gauss curvature equation."""

from ._gclab import (
    DegenerateGapError,
    DomainError,
    EmptySetError,
    Error,
    InputError,
    RangeError,
    closed_form_2x2,
    eigen_derivatives,
    eigen_system,
    estimate,
    gradient_bound,
    manufactured_names,
    perturbation_oracle,
    run_command,
    set_thread_limit,
    solve,
    thread_limit,
)

__all__ = [
    "DegenerateGapError",
    "DomainError",
    "EmptySetError",
    "Error",
    "InputError",
    "RangeError",
    "closed_form_2x2",
    "eigen_derivatives",
    "eigen_system",
    "estimate",
    "gradient_bound",
    "manufactured_names",
    "perturbation_oracle",
    "run_command",
    "set_thread_limit",
    "solve",
    "thread_limit",
]
