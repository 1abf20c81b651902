"""Python interface to the arakelov-lab C++ core.

Points, maps, lattices and metrics are passed as the same JSON-shaped
dictionaries the command line tool reads.
"""

import json as _json
from fractions import Fraction as _Fraction

from . import _core
from ._core import ArakelovError

__all__ = [
    "ArakelovError",
    "height",
    "canonical_height",
    "covolume",
    "chi",
    "bilu",
    "self_intersection_c",
    "mixed_intersection",
    "distortion_sup",
    "run_cli",
]


def _dump(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def _ints(values):
    # big integers travel as decimal strings
    return [str(v) for v in values]


def height(point):
    """Absolute logarithmic Weil height of a point dictionary."""
    point = dict(point)
    for key in ("coords", "coeffs"):
        if key in point:
            point[key] = _ints(point[key])
    return _core.height(_dump(point))


def canonical_height(phi, point, eps=1e-8):
    """Returns (value, error_bound, iterations)."""
    point = dict(point)
    if "coords" in point:
        point["coords"] = _ints(point["coords"])
    return _core.canonical_height(_dump(phi), _dump(point), eps)


def _lattice(gram, torsion):
    rows = [[str(x) for x in row] for row in gram]
    return _dump({"gram": rows, "torsion": str(torsion)})


def covolume(gram, torsion=1):
    """det(gram) / torsion^2 as an exact Fraction."""
    return _Fraction(_core.covolume(_lattice(gram, torsion)))


def chi(gram, torsion=1):
    """Arithmetic Euler characteristic log V(r) - 1/2 log covolume."""
    return _core.chi(_lattice(gram, torsion))


def bilu(orders, cutoff=8):
    return _json.loads(_core.bilu(list(orders), cutoff))


def self_intersection_c(c):
    return _core.self_intersection_c(c)


def mixed_intersection(a, b):
    return _core.mixed_intersection(_dump(a), _dump(b))


def distortion_sup(metric, measure):
    return _core.distortion_sup(_dump(metric), _dump(measure))


def run_cli(*args):
    """Runs the command line tool in-process; returns (exit_code, stdout, stderr)."""
    if not hasattr(_core, "run_cli"):
        raise RuntimeError("extension was built without the CLI")
    return _core.run_cli([str(a) for a in args])
