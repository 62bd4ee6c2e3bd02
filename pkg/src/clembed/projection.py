"""The common output type of every aligner: a pair of linear maps.

Source vectors are compared against target vectors after applying
x_src @ w_src and x_tgt @ w_tgt respectively. Direct source-to-target
methods leave w_tgt as the identity.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

ORTHOGONALITY_TOL = 1e-6


@dataclass(frozen=True)
class ProjectionPair:
    w_src: np.ndarray
    w_tgt: np.ndarray
    orthogonal_src: bool
    method: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.w_src.ndim != 2 or self.w_tgt.ndim != 2:
            raise ValueError("projection matrices must be 2-D")
        if self.w_src.shape[0] != self.w_src.shape[1]:
            raise ValueError("w_src must be square")
        if self.w_tgt.shape[0] != self.w_tgt.shape[1]:
            raise ValueError("w_tgt must be square")
        if self.orthogonal_src:
            gram = self.w_src.T @ self.w_src
            err = np.max(np.abs(gram - np.eye(gram.shape[0])))
            if err >= ORTHOGONALITY_TOL:
                raise ValueError(
                    f"w_src flagged orthogonal but ||W'W - I||_max = {err:.2e}")

    def project_src(self, matrix: np.ndarray) -> np.ndarray:
        return matrix @ self.w_src

    def project_tgt(self, matrix: np.ndarray) -> np.ndarray:
        return matrix @ self.w_tgt


def identity_pair(dim: int, method: str = "identity") -> ProjectionPair:
    eye = np.eye(dim)
    return ProjectionPair(w_src=eye, w_tgt=eye.copy(), orthogonal_src=True,
                          method=method)


def save_matrix_text(matrix: np.ndarray, path: str | os.PathLike) -> None:
    """Headerless whitespace-separated text matrix (same grammar as embeddings)."""
    np.savetxt(path, matrix, fmt="%.17g")


def load_matrix_text(path: str | os.PathLike) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path))


def save_projection(pair: ProjectionPair, out_dir: str | os.PathLike) -> None:
    os.makedirs(out_dir, exist_ok=True)
    save_matrix_text(pair.w_src, os.path.join(out_dir, "w_src.txt"))
    save_matrix_text(pair.w_tgt, os.path.join(out_dir, "w_tgt.txt"))
    record = {"method": pair.method, "orthogonal_src": pair.orthogonal_src,
              "metadata": pair.metadata}
    with open(os.path.join(out_dir, "projection.json"), "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_projection(out_dir: str | os.PathLike) -> ProjectionPair:
    with open(os.path.join(out_dir, "projection.json"), encoding="utf-8") as fh:
        record = json.load(fh)
    return ProjectionPair(
        w_src=load_matrix_text(os.path.join(out_dir, "w_src.txt")),
        w_tgt=load_matrix_text(os.path.join(out_dir, "w_tgt.txt")),
        orthogonal_src=record["orthogonal_src"],
        method=record["method"],
        metadata=record.get("metadata", {}),
    )
