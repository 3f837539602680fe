"""Targeted agreement evaluation with minimal pairs (German)."""

import json

from . import _core
from ._core import AgreebenchError, TransportError, cross_entropy

__version__ = _core.__version__


def generate(grammar_dir, pairs_path):
    """Write the pair file and manifest; return the manifest as a dict."""
    return json.loads(_core.generate(str(grammar_dir), str(pairs_path)))


def pairs(grammar_dir):
    return [json.loads(r) for r in _core.pair_records(str(grammar_dir))]


def evaluate(pairs_path, backend="oracle", **options):
    return json.loads(_core.evaluate(str(pairs_path), backend, **options))


def report(report, format="markdown"):
    """Render a report (dict or serialized text) as json, tsv or markdown."""
    text = report if isinstance(report, str) else json.dumps(report)
    return _core.convert_report(text, format)


def stats(pairs_path, grammar_dir=None):
    return json.loads(_core.stats(str(pairs_path), str(grammar_dir or "")))


__all__ = [
    "AgreebenchError",
    "TransportError",
    "cross_entropy",
    "evaluate",
    "generate",
    "pairs",
    "report",
    "stats",
]
