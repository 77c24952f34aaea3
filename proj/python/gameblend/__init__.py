"""Blend tile-based game levels with variational autoencoders.

Thin Python layer over the C++ core. JSON-valued results come back as dicts,
segment batches as (n, 15, 16) uint16 arrays of tile ids.
"""

import json as _json

from ._gameblend import (  # noqa: F401
    Checkpoint,
    Corpus,
    DataError,
    NumericError,
    UsageError,
    Vocab,
    __version__,
    binary_weights,
    blend_score,
    directional_match,
    fractional_weights,
    sample,
    tpkldiv,
)
from . import _gameblend as _core


def _text(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def train(corpus, config):
    """Train a model. `config` is a ModelConfig dict (or JSON text)."""
    return _core.train(corpus, _text(config))


def layout(model, weights, kind="dungeon", n=4, seed=0):
    """Whole level: returns (grid, sidecar dict)."""
    grid, sidecar = _core.layout(model, weights, kind, n, seed)
    return grid, _json.loads(sidecar)


def jump_arcs(jump):
    return _core.jump_arcs(_text(jump))


def playability(grid, vocab, jump):
    """Agent verdict for one grid under a jump model dict."""
    return _json.loads(_core.playability(grid, vocab, _text(jump)))


class Service:
    """In-process version of the HTTP service; no sockets involved."""

    def __init__(self, checkpoints, jumps=None):
        self._svc = _core.Service({k: str(v) for k, v in checkpoints.items()},
                                  None if jumps is None else str(jumps))

    def request(self, method, path, body=None, query=None):
        text = "" if body is None else _text(body)
        status, out = self._svc.handle(method, path, text, query or {})
        return status, _json.loads(out)
