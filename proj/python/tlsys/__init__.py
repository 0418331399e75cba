"""Finite transfer-learning systems: analyses over JSON spec documents."""

import json

from . import _core
from ._core import Error, SPEC_VERSION, COMPLEXITY_FORMULA, complexity_term, digest, divergence

__version__ = _core.__version__

__all__ = [
    "Error",
    "SPEC_VERSION",
    "COMPLEXITY_FORMULA",
    "analyze",
    "canonical_spec",
    "complexity_term",
    "digest",
    "divergence",
    "run_cli",
    "scenario_document",
]


def _text(spec):
    return spec if isinstance(spec, str) else json.dumps(spec)


def run_cli(*args):
    """Run the tool in-process. Returns (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])


def canonical_spec(spec, strict=False):
    """Canonical form of a spec (dict or JSON text) as a dict, plus warnings."""
    text, warnings = _core.canonical_spec(_text(spec), strict)
    return json.loads(text), list(warnings)


def analyze(spec, kind="", seed=0, **overrides):
    """Results section of one analysis as a dict."""
    return json.loads(_core.analyze(_text(spec), kind, seed, json.dumps(overrides)))


def scenario_document(**scenario):
    """Spec document (dict) for the pair generated from scenario fields."""
    return json.loads(_core.scenario_document(json.dumps(scenario)))
