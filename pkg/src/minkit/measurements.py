"""Locally invariant projective measurements on the measured party.

A measurement here is a complete set of mutually orthogonal projectors on
party A; the families produced by ``invariant_family`` enumerate exactly
the measurements that leave a given reduced state fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import PAULIS, hermitian_eig, hs_norm, is_hermitian, tensor_product
from .states import DensityMatrix, validate

PROJECTOR_TOL = 1e-10
INVARIANCE_TOL = 1e-9
DEGENERACY_TOL = 1e-8

KIND_UNIQUE = "unique"
KIND_QUBIT_SPHERE = "qubit_sphere"
KIND_BLOCK = "block_degenerate"


@dataclass(frozen=True)
class LocalMeasurement:
    """Complete set of mutually orthogonal projectors on party A."""

    projectors: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]


def local_measurement(projectors, tol: float = PROJECTOR_TOL) -> LocalMeasurement:
    """Validate projector axioms (Hermitian, idempotent, orthogonal, complete)."""
    ps = tuple(np.asarray(p, dtype=complex) for p in projectors)
    d = ps[0].shape[0]
    total = np.zeros((d, d), dtype=complex)
    for k, p in enumerate(ps):
        if p.shape != (d, d):
            raise ValueError("projectors must share one square shape")
        if not is_hermitian(p, tol):
            raise ValueError(f"projector {k} is not Hermitian")
        if np.abs(p @ p - p).max() > tol:
            raise ValueError(f"projector {k} is not idempotent")
        total += p
    for j in range(len(ps)):
        for k in range(j + 1, len(ps)):
            if np.abs(ps[j] @ ps[k]).max() > tol:
                raise ValueError(f"projectors {j} and {k} are not orthogonal")
    if np.abs(total - np.eye(d)).max() > tol:
        raise ValueError("projectors do not sum to the identity")
    return LocalMeasurement(projectors=ps)


def apply_projectors(mat: np.ndarray, m: LocalMeasurement, db: int) -> np.ndarray:
    """Post-measurement matrix sum_k (P_k x I) mat (P_k x I), unvalidated."""
    out = np.zeros_like(mat)
    idb = np.eye(db, dtype=complex)
    for p in m.projectors:
        big = tensor_product(p, idb)
        out += big @ mat @ big
    return out


def apply_measurement(rho: DensityMatrix, m: LocalMeasurement) -> DensityMatrix:
    """Measure party A without reading the outcome; returns a valid state."""
    if m.dim != rho.da:
        raise ValueError(f"measurement dimension {m.dim} != dA {rho.da}")
    return validate(apply_projectors(rho.mat, m, rho.db), rho.dims)


def is_invariant(m: LocalMeasurement, rho_a: np.ndarray, tol: float = INVARIANCE_TOL) -> bool:
    """Whether the measurement leaves the reduced state unchanged."""
    out = np.zeros_like(rho_a, dtype=complex)
    for p in m.projectors:
        out += p @ rho_a @ p
    return hs_norm(out - rho_a) <= tol


def sphere_measurement(e_hat: np.ndarray) -> LocalMeasurement:
    """Qubit measurement along a unit Bloch direction."""
    e = np.asarray(e_hat, dtype=float)
    if abs(np.linalg.norm(e) - 1.0) > 1e-10:
        raise ValueError(f"direction must be a unit vector, |e| = {np.linalg.norm(e):.12g}")
    es = e[0] * PAULIS[0] + e[1] * PAULIS[1] + e[2] * PAULIS[2]
    i2 = np.eye(2, dtype=complex)
    return LocalMeasurement(projectors=((i2 + es) / 2, (i2 - es) / 2))


@dataclass(frozen=True)
class MeasurementFamily:
    """All rank-1 projective measurements leaving a reduced state invariant.

    kind "unique":           a single fixed measurement (``fixed``).
    kind "qubit_sphere":     every direction on the Bloch sphere (dA = 2,
                             fully degenerate marginal).
    kind "block_degenerate": the eigenbasis columns (``basis``) refined by
                             an arbitrary unitary inside each degenerate
                             block; ``blocks`` lists (offset, size).
    """

    kind: str
    fixed: LocalMeasurement | None = None
    basis: np.ndarray | None = None
    blocks: tuple[tuple[int, int], ...] | None = None

    def refined(self, block_unitaries) -> LocalMeasurement:
        """Rank-1 measurement from one unitary per degenerate block.

        ``block_unitaries`` supplies a unitary for each block of size >= 2,
        in block order; size-1 blocks have no freedom.
        """
        if self.kind != KIND_BLOCK:
            raise ValueError("refined() applies to block_degenerate families only")
        cols = self.basis.copy()
        it = iter(block_unitaries)
        for off, size in self.blocks:
            if size >= 2:
                u = next(it)
                cols[:, off : off + size] = cols[:, off : off + size] @ u
        return LocalMeasurement(
            projectors=tuple(np.outer(cols[:, k], cols[:, k].conj()) for k in range(cols.shape[1]))
        )


def invariant_family(rho_a: np.ndarray, degeneracy_tol: float = DEGENERACY_TOL) -> MeasurementFamily:
    """Enumerate the invariant rank-1 measurements of a reduced state.

    Eigenvalues closer than ``degeneracy_tol`` are grouped into one block;
    near-degenerate spectra are deliberately treated as degenerate because
    the induced measurement (and the nonlocality value) is discontinuous
    across the gap closing.
    """
    eig = hermitian_eig(rho_a)
    w = eig.eigenvalues
    blocks: list[tuple[int, int]] = []
    start = 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k - 1] - w[k] > degeneracy_tol:
            blocks.append((start, k - start))
            start = k
    if all(size == 1 for _, size in blocks):
        projs = tuple(
            np.outer(eig.eigenvectors[:, k], eig.eigenvectors[:, k].conj())
            for k in range(len(w))
        )
        return MeasurementFamily(kind=KIND_UNIQUE, fixed=LocalMeasurement(projectors=projs))
    if rho_a.shape[0] == 2:
        return MeasurementFamily(kind=KIND_QUBIT_SPHERE)
    return MeasurementFamily(
        kind=KIND_BLOCK, basis=eig.eigenvectors, blocks=tuple(blocks)
    )
