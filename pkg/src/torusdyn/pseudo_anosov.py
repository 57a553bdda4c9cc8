"""Power-irreducible ("pseudo-Anosov") subspaces of a toral automorphism.

Finds k and the smallest A^k-invariant rational subspace X containing the
center, together with the primitive lattice L = Z^N  intersect X, such that
the characteristic polynomial of A^k restricted to X stays irreducible for
all powers.  The irreducibility-for-all-powers condition is checked through
its polynomial form (irreducible and not a polynomial in x^m), and can be
cross-validated by sampling cyclic vectors.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetError, InputError, InvariantError, NotErgodicError, OutOfHypothesesError
from .intmatrix import IntMatrix
from .intpoly import IntPoly, count_unitary_roots, cyclotomic_free, is_poly_in_xm
from .lattice import Lattice, is_cyclic_vector, kernel_lattice
from .splitting import Splitting, compute_splitting
from .zfactor import factor_z, is_irreducible_z


def pa_condition_polynomial(p: IntPoly) -> bool:
    """Condition on the char poly equivalent to all-power irreducibility:
    irreducible over Z and not a polynomial in x^m for any m > 1."""
    if not p.is_monic:
        raise ValueError("expected a monic polynomial")
    return is_irreducible_z(p) and is_poly_in_xm(p) is None


@dataclass(frozen=True)
class CyclicSampleResult:
    ok: bool
    witness_k: Optional[int]
    witness_vector: Optional[tuple[int, ...]]
    vectors_checked: int


def pa_condition_cyclic_sample(
    a: IntMatrix,
    k_max: int = 6,
    trials: int = 100,
    seed: int = 0,
) -> CyclicSampleResult:
    """Falsification check of all-power cyclicity of lattice vectors.

    For each k <= k_max, tests `trials` random nonzero integer vectors plus
    structured candidates taken from kernel lattices of proper factors of
    the char poly of A^k (random vectors are generically cyclic even when
    reducibility makes non-cyclic vectors exist, so the kernel candidates
    are what makes falsification reliable).
    """
    rng = random.Random(seed)
    n = a.n
    checked = 0
    ak = IntMatrix.identity(n)
    for k in range(1, k_max + 1):
        ak = ak * a
        candidates: list[tuple[int, ...]] = []
        for q, _mult in factor_z(ak.char_poly()):
            if q.degree < n:
                ker = kernel_lattice(ak.apply_poly(q))
                candidates.extend(ker.basis)
        while len(candidates) < trials:
            v = tuple(rng.randint(-5, 5) for _ in range(n))
            if any(v):
                candidates.append(v)
        for v in candidates[:max(trials, len(candidates))]:
            checked += 1
            if not is_cyclic_vector(ak, v):
                return CyclicSampleResult(False, k, tuple(v), checked)
    return CyclicSampleResult(True, None, None, checked)


@dataclass(frozen=True)
class PASubspace:
    """A^k-invariant subspace X (spanned by the lattice) where the restricted
    map stays irreducible for all powers."""

    k: int
    dim_x: int
    p_k: IntPoly
    lam: Lattice
    center_residual: float

    @property
    def x_basis(self) -> tuple[tuple[int, ...], ...]:
        """Rational basis of X (the primitive lattice basis spans X over Q)."""
        return self.lam.basis

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "dim_x": self.dim_x,
            "p_k_coeffs": list(self.p_k.coeffs),
            "lambda_basis_hnf": [list(r) for r in self.lam.basis],
            "center_residual": self.center_residual,
        }


def restricted_matrix(a: IntMatrix, lat: Lattice) -> IntMatrix:
    """Matrix of A acting on the lattice, in lattice coordinates (exact)."""
    rows = []
    for b in lat.basis:
        img = a.matvec(b)
        coords = lat.coordinates(img)
        if coords is None:
            raise InvariantError("lattice is not invariant under the matrix")
        rows.append(coords)
    # coordinates() returns row-action coordinates; the action matrix sends
    # coordinate columns, so transpose.
    return IntMatrix(rows).transpose()


def _unitary_factor(p: IntPoly) -> tuple[IntPoly, int]:
    """The unique irreducible factor of p carrying the two unitary roots."""
    hits = []
    for q, mult in factor_z(p):
        u = count_unitary_roots(q)
        if u == 2:
            hits.append((q, mult))
        elif u != 0:
            raise InvariantError("factor with unexpected unitary root count")
    if len(hits) != 1:
        raise InvariantError("expected exactly one factor carrying the unitary pair")
    q, mult = hits[0]
    if mult != 1:
        raise OutOfHypothesesError("unitary factor has multiplicity > 1")
    return q, mult


def center_containment_residual(lat: Lattice, split: Splitting) -> float:
    """|| (I - P_X) basis_c ||_max for the orthogonal projector P onto span(X)."""
    if lat.rank == 0:
        return float(np.max(np.abs(split.basis_c))) if split.basis_c.size else 0.0
    q, _ = np.linalg.qr(np.array(lat.basis, dtype=float).T)
    bc = split.basis_c
    return float(np.max(np.abs(bc - q @ (q.T @ bc)))) if bc.size else 0.0


def pseudo_anosov_subspace(
    a: IntMatrix,
    k_max: int = 24,
    split: Optional[Splitting] = None,
    center_tol: float = 1e-9,
) -> PASubspace:
    """Find k <= k_max minimizing the unitary-factor degree and build (X, L).

    Candidates are examined in (degree, k) order; the winner must pass the
    polynomial all-power condition and every structural invariant.
    """
    p = a.char_poly()
    if not cyclotomic_free(p):
        raise NotErgodicError("matrix has a root-of-unity eigenvalue")
    if count_unitary_roots(p) != 2:
        raise OutOfHypothesesError("center dimension is not 2")
    if split is None:
        split = compute_splitting(a)

    candidates = []
    ak = IntMatrix.identity(a.n)
    for k in range(1, k_max + 1):
        ak = ak * a
        pk, _ = _unitary_factor(ak.char_poly())
        candidates.append((pk.degree, k, pk, ak))
    candidates.sort(key=lambda t: (t[0], t[1]))

    for d, k, pk, ak in candidates:
        if not pa_condition_polynomial(pk):
            continue
        lam = kernel_lattice(ak.apply_poly(pk))
        if lam.rank != d:
            raise InvariantError("kernel lattice rank disagrees with factor degree")
        if d % 2 != 0 or d < 4:
            raise InvariantError("subspace dimension must be even and >= 4")
        if lam.transform(ak) != lam:
            raise InvariantError("lattice is not preserved by A^k")
        resid = center_containment_residual(lam, split)
        if resid > center_tol:
            raise InvariantError(f"center subspace not contained in X (residual {resid:.2e})")
        return PASubspace(k=k, dim_x=d, p_k=pk, lam=lam, center_residual=resid)
    raise BudgetError(f"no power k <= {k_max} passes verification (k_max exceeded)")


def orbit_sublattice(a: IntMatrix, k: int, l: int, n_vec: Sequence[int], pa: PASubspace) -> Lattice:
    """Lattice spanned by n, A^(kl) n, ..., A^(kl(dim_x - 1)) n, in HNF.

    Full rank in X is guaranteed by cyclicity and verified exactly.
    """
    if not any(n_vec):
        raise InputError("n must be a nonzero lattice vector")
    if not pa.lam.contains(n_vec):
        raise InputError("n is not in the invariant lattice")
    step = a ** (k * l)
    rows = []
    v = tuple(int(x) for x in n_vec)
    for _ in range(pa.dim_x):
        rows.append(v)
        v = step.matvec(v)
    gamma = Lattice.from_rows(rows, a.n)
    if gamma.rank != pa.dim_x:
        raise InvariantError("iterates of n do not have full rank in X")
    return gamma
