"""Matrix and vector JSON files.

A matrix file holds {"n": n, "entries": [[[re, im], ...], ...]} with one row
per list. Floats are written with their shortest round-tripping repr, so a
written matrix re-parses bit for bit.
"""

import hashlib
import json
import torch

from heightlab.errors import DomainError
from heightlab.linalg import DTYPE, as_matrix, as_vector


def _entry_to_pair(z: complex):
    return [z.real, z.imag]


def _pair_to_entry(pair):
    if isinstance(pair, (int, float)):
        return complex(pair, 0.0)
    if (
        not isinstance(pair, (list, tuple))
        or len(pair) != 2
        or not all(isinstance(x, (int, float)) for x in pair)
    ):
        raise DomainError(f"Expected a [re, im] pair, got {pair!r}")

    return complex(pair[0], pair[1])


def matrix_to_json(A: torch.Tensor):
    """Returns the JSON-serializable dict for A."""
    return {
        "n": A.shape[0],
        "entries": [[_entry_to_pair(z) for z in row] for row in A.tolist()],
    }


def matrix_from_json(data: dict):
    """Parses a matrix dict, validating n against the entries."""
    if not isinstance(data, dict) or "entries" not in data:
        raise DomainError("Matrix JSON must be an object with 'entries'")

    entries = data["entries"]
    if not isinstance(entries, list) or not all(
        isinstance(row, list) for row in entries
    ):
        raise DomainError("'entries' must be a list of rows")

    rows = [[_pair_to_entry(pair) for pair in row] for row in entries]
    n = data.get("n", len(rows))
    if n != len(rows) or any(len(row) != n for row in rows):
        raise DomainError(f"Matrix JSON is not {n} x {n}")

    return as_matrix(torch.tensor(rows, dtype=DTYPE))


def save_matrix(A: torch.Tensor, save_path: str):
    with open(save_path, "w", encoding="utf-8") as f:
        json.dump(matrix_to_json(A), f)


def load_matrix(load_path: str):
    """Loads a matrix file. Raises DomainError on malformed content."""
    try:
        with open(load_path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise DomainError(f"Could not parse {load_path}: {e}")

    return matrix_from_json(data)


def load_vector(load_path: str, n: int | None = None):
    """Loads a vector from a JSON list of numbers or [re, im] pairs, or from an
    object {"entries": [...]}."""
    try:
        with open(load_path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise DomainError(f"Could not parse {load_path}: {e}")

    if isinstance(data, dict):
        data = data.get("entries")
    if not isinstance(data, list):
        raise DomainError("Vector JSON must be a list of entries")

    return as_vector(
        torch.tensor([_pair_to_entry(x) for x in data], dtype=DTYPE), n
    )


def matrix_hash(A: torch.Tensor):
    """Returns the sha256 hex digest of the canonical matrix JSON."""
    canonical = json.dumps(
        matrix_to_json(A), sort_keys=True, separators=(",", ":")
    )

    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
