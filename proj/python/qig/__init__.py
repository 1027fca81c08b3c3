"""Python front end for the qig library.

Graphs are plain dicts in the library's JSON schema:
{"nodes": [...], "arcs": [[tail, head], ...], "edges": [[u, v], ...], "targets": [...]}.
"""

import json

from . import _qig
from ._qig import DataError, GraphError, SolverError

__all__ = ["DataError", "GraphError", "SolverError", "learn", "facets", "facet_rows", "vertices", "verify",
           "simulate", "score"]


def _graph(g):
    return g if isinstance(g, str) else json.dumps(g)


def learn(manifest, mi_pool=False, center=False, seed=0):
    """Run the learning pipeline on a manifest; returns the report without timing fields."""
    return json.loads(_qig.learn_json(str(manifest), mi_pool, center, seed))


def facets(tree, targets=(), J=()):
    return json.loads(_qig.facets_json(_graph(tree), list(targets), list(J)))


def facet_rows(tree, targets=(), J=()):
    return _qig.facet_rows(_graph(tree), list(targets), list(J))


def vertices(tree, targets=(), J=()):
    return json.loads(_qig.vertices_json(_graph(tree), list(targets), list(J)))


def verify(suite="all", seed=20240611, jobs=1):
    return json.loads(_qig.verify_json(suite, seed, jobs))


def simulate(dag, targets, n, seed, out_dir):
    """Simulate n samples per context and write them to out_dir; returns the manifest path."""
    return _qig.simulate(_graph(dag), list(targets), n, seed, str(out_dir))


def score(manifest, dag, center=False):
    return json.loads(_qig.score_json(str(manifest), _graph(dag), center))
