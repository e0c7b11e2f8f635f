"""Regular inclusions of finite-dimensional algebras.

Every function takes an inclusion matrix and the B dimension vector and
returns ``(report, exit_code)``, where ``report`` is the same JSON report the
``regincl`` command line tool prints, decoded into Python objects.
"""

import json

import numpy as np

from . import _regincl

__all__ = ["analyze", "build_basis", "canonicalize", "decompose", "depth", "verify", "basis_members"]

EXIT_OK = 0
EXIT_REFUSED = 2
EXIT_SOLVER = 4
EXIT_VERIFY_FAILED = 5


def _descriptor(matrix, b_dims, label=None):
    doc = {
        "inclusion_matrix": [[int(x) for x in row] for row in np.asarray(matrix).tolist()],
        "b_dims": [int(x) for x in b_dims],
    }
    if label is not None:
        doc["label"] = label
    return json.dumps(doc)


def _decode(result):
    text, code = result
    return json.loads(text), code


def analyze(matrix, b_dims, label=None, **solver):
    return _decode(_regincl.analyze(_descriptor(matrix, b_dims, label), **solver))


def build_basis(matrix, b_dims, label=None, **solver):
    return _decode(_regincl.build_basis(_descriptor(matrix, b_dims, label), **solver))


def canonicalize(matrix, b_dims=None):
    if b_dims is None:
        b_dims = [1] * np.asarray(matrix).shape[1]
    return _decode(_regincl.canonicalize(_descriptor(matrix, b_dims)))


def decompose(matrix, b_dims):
    return _decode(_regincl.decompose(_descriptor(matrix, b_dims)))


def depth(matrix, depth_max=6):
    b_dims = [1] * np.asarray(matrix).shape[1]
    return _decode(_regincl.depth(_descriptor(matrix, b_dims), depth_max=depth_max))


def verify(matrix, b_dims, basis):
    """Check a basis payload (a build_basis report, or its "basis" object)."""
    return _decode(_regincl.verify(_descriptor(matrix, b_dims), json.dumps(basis)))


def basis_members(report):
    """Members of a built basis as lists of complex blocks, one per A summand."""
    payload = report.get("basis", report)
    out = []
    for member in payload["members"]:
        blocks = []
        for blk in member:
            data = np.array(blk["data"], dtype=float)
            blocks.append((data[:, 0] + 1j * data[:, 1]).reshape(blk["rows"], blk["cols"]))
        out.append(blocks)
    return out
