"""Finite Hilbert-space representations of measurement models."""

from __future__ import annotations

from . import errors, evolution, gauge, hilbert, model, observables, probability, products, verifier
from .errors import ModelError
from .hilbert import GramKernel, HilbertChart, StateVector, build_chart, components, lift
from .model import ModelSpec, parse_model_spec
from .observables import Operator, primary

__all__ = [
    "GramKernel",
    "HilbertChart",
    "ModelError",
    "ModelSpec",
    "Operator",
    "StateVector",
    "build_chart",
    "components",
    "errors",
    "evolution",
    "gauge",
    "hilbert",
    "lift",
    "model",
    "observables",
    "parse_model_spec",
    "primary",
    "probability",
    "products",
    "verifier",
]
