"""Spectral splitting of a toral automorphism and its adapted norms.

The splitting into stable / center / unstable subspaces is computed
numerically (sorted real Schur forms), but every discrete claim -- the
three dimensions, per-factor root counts, Salem flags -- is certified by
exact integer arithmetic: Sturm counts for roots of modulus one,
inverse-root pairing inside reciprocal factors, and an exact winding
count over the unit circle for factors without unitary roots.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import InvariantError, NotErgodicError, OutOfHypothesesError
from .intmatrix import IntMatrix
from .intpoly import (
    IntPoly,
    _sign_at,
    count_real_roots,
    count_unitary_roots,
    cyclotomic,
    cyclotomic_free,
    cyclotomic_indices_up_to_degree,
    div_exact,
    divides,
    is_poly_in_xm,
    is_reciprocal,
    isolate_real_roots,
    sturm_chain,
)
from .zfactor import factor_z, is_irreducible_z

# -- exact root location on / inside the unit circle ---------------------------


def chebyshev_t(k: int) -> IntPoly:
    t = [IntPoly((1,)), IntPoly((0, 1))]
    while len(t) <= k:
        t.append(2 * IntPoly((0, 1)) * t[-1] - t[-2])
    return t[k]


def chebyshev_u(k: int) -> IntPoly:
    u = [IntPoly((1,)), IntPoly((0, 2))]
    while len(u) <= k:
        u.append(2 * IntPoly((0, 1)) * u[-1] - u[-2])
    return u[k]


def circle_parts(p: IntPoly) -> tuple[IntPoly, IntPoly]:
    """(R, S) with p(e^{i t}) = R(cos t) + i sin t * S(cos t)."""
    r = IntPoly(())
    s = IntPoly(())
    for k, c in enumerate(p.coeffs):
        if not c:
            continue
        r = r + c * chebyshev_t(k)
        if k >= 1:
            s = s + c * chebyshev_u(k - 1)
    return r, s


_EIGHTH = {  # (sign Re, sign Im) -> angle sector in units of pi/4
    (1, 0): 0, (1, 1): 1, (0, 1): 2, (-1, 1): 3,
    (-1, 0): 4, (-1, -1): 5, (0, -1): 6, (1, -1): 7,
}


def _halve_interval(iv: tuple[Fraction, Fraction, int], chains) -> tuple[Fraction, Fraction, int]:
    a, b, idx = iv
    chain = chains[idx]
    f = chain[0]
    m = (a + b) / 2
    k = 3
    while _sign_at(f, m) == 0:
        m = a + (b - a) / k
        k += 1
    if count_real_roots(f, a, m, chain=chain) == 1:
        return (a, m, idx)
    return (m, b, idx)


def _refine_to_disjoint(ivals: list[tuple[Fraction, Fraction, int]], chains) -> list[tuple[Fraction, Fraction, int]]:
    """Shrink isolating intervals until no two overlap (roots are distinct)."""
    changed = True
    while changed:
        changed = False
        ivals.sort()
        for i in range(len(ivals) - 1):
            _, b1, _ = ivals[i]
            a2, _, _ = ivals[i + 1]
            if b1 > a2:
                ivals[i] = _halve_interval(ivals[i], chains)
                ivals[i + 1] = _halve_interval(ivals[i + 1], chains)
                changed = True
    ivals.sort()
    return ivals


def _shrink_off_endpoints(ivals, chains, lo: Fraction, hi: Fraction):
    """Pull isolating intervals strictly inside (lo, hi) so samples fit around them."""
    out = []
    for iv in ivals:
        while iv[0] <= lo or iv[1] >= hi:
            iv = _halve_interval(iv, chains)
        out.append(iv)
    out.sort()
    return out


def unit_disk_root_count(p: IntPoly) -> int:
    """Number of roots strictly inside the unit circle, with multiplicity.

    Requires that p has no root of modulus one (and hence none at +-1).
    Exact: the winding number of t -> p(e^{i t}) around 0 is accumulated
    from signs of the integer polynomials R, S of ``circle_parts`` at
    rational sample points separating their roots in (-1, 1).
    """
    if p.is_zero:
        raise ValueError("zero polynomial")
    if p.degree == 0:
        return 0
    if p(1) == 0 or p(-1) == 0:
        raise ValueError("root at +-1")
    if p.degree == 1:
        return 1 if abs(p.coeffs[0]) < abs(p.coeffs[1]) else 0
    if p.degree == 2:
        a0, a1, a2 = p.coeffs
        disc = a1 * a1 - 4 * a2 * a0
        if disc < 0:
            # conjugate pair with |root|^2 = a0/a2
            return 2 if abs(a0) < abs(a2) else 0
        if disc == 0:
            return 2 if abs(a1) < abs(2 * a2) else 0
        return count_real_roots(p, Fraction(-1), Fraction(1))
    r_poly, s_poly = circle_parts(p)

    one = Fraction(1)
    # isolate the sign-change locations of R and S inside (-1, 1)
    chains = []
    ivals: list[tuple[Fraction, Fraction, int]] = []
    for idx, q in enumerate((r_poly, s_poly)):
        if q.degree < 1:
            chains.append(sturm_chain(q) if not q.is_zero else [q])
            continue
        qq = q
        # strip roots exactly at the endpoints (harmless: sin t vanishes there)
        for root in (1, -1):
            while qq.degree >= 1 and qq(root) == 0:
                qq = div_exact(qq, IntPoly((-root, 1)))
        chain = sturm_chain(qq)
        chains.append(chain)
        if qq.degree >= 1:
            for a, b in isolate_real_roots(qq, -one, one):
                ivals.append((a, b, idx))
    ivals = _refine_to_disjoint(ivals, chains)
    ivals = _shrink_off_endpoints(ivals, chains, -one, one)

    # rational samples strictly between consecutive isolated roots
    samples: list[Fraction] = []
    prev = -one
    for a, b, _ in ivals:
        samples.append((prev + a) / 2)
        prev = b
    samples.append((prev + one) / 2)

    def sector(re_sign: int, im_sign: int) -> int:
        return _EIGHTH[(re_sign, im_sign)]

    seq: list[int] = []
    s_at_1 = (p(1) > 0) - (p(1) < 0)
    s_at_m1 = (p(-1) > 0) - (p(-1) < 0)
    seq.append(sector(s_at_1, 0))
    for c in reversed(samples):  # top arc: cos t runs 1 -> -1, sin t > 0
        seq.append(sector(_sign_at(r_poly, c), _sign_at(s_poly, c)))
    seq.append(sector(s_at_m1, 0))
    for c in samples:  # bottom arc: cos t runs -1 -> 1, sin t < 0
        seq.append(sector(_sign_at(r_poly, c), -_sign_at(s_poly, c)))
    seq.append(seq[0])

    total = 0
    for a, b in zip(seq, seq[1:]):
        d = (b - a) % 8
        if d > 4 or (d == 4):
            d -= 8
        if abs(d) > 2:
            raise InvariantError("circle sweep skipped a sector; isolation failed")
        total += d
    if total % 8:
        raise InvariantError("circle sweep winding is not an integer")
    return total // 8


def exact_modulus_counts(p: IntPoly) -> tuple[int, int, int]:
    """(inside, on, outside) root counts of monic p w.r.t. the unit circle.

    Requires p(1) != 0 != p(-1).  Per irreducible factor: a factor with
    unitary roots is reciprocal, so its off-circle roots split evenly
    between inside and outside; factors without unitary roots go through
    the exact winding count.
    """
    if p(1) == 0 or p(-1) == 0:
        raise ValueError("roots of unity present; split them off first")
    inside = on = outside = 0
    for q, mult in factor_z(p):
        u = count_unitary_roots(q)
        if u:
            if not is_reciprocal(q):
                raise InvariantError("factor with unitary roots is not reciprocal")
            k = (q.degree - u) // 2
            inside += mult * k
            outside += mult * k
            on += mult * u
        else:
            k = unit_disk_root_count(q)
            inside += mult * k
            outside += mult * (q.degree - k)
    return inside, on, outside


def strip_cyclotomic(p: IntPoly) -> tuple[IntPoly, list[tuple[int, int]]]:
    """Divide out all cyclotomic factors; returns (rest, [(m, multiplicity)])."""
    rest = p
    found: list[tuple[int, int]] = []
    for m in cyclotomic_indices_up_to_degree(max(p.degree, 1)):
        phi = cyclotomic(m)
        mult = 0
        while rest.degree >= phi.degree and divides(phi, rest):
            rest = div_exact(rest, phi)
            mult += 1
        if mult:
            found.append((m, mult))
    return rest, found


def center_dimension(p: IntPoly) -> int:
    """dim E^c for any monic char poly (roots of unity included)."""
    rest, cyc = strip_cyclotomic(p)
    total = sum(cyclotomic(m).degree * mult for m, mult in cyc)
    if rest.degree > 0:
        total += count_unitary_roots(rest)
    return total


# -- classification report -----------------------------------------------------


@dataclass(frozen=True)
class FactorRecord:
    coeffs: tuple[int, ...]
    degree: int
    multiplicity: int
    unitary_roots: int
    reciprocal: bool
    cyclotomic_index: Optional[int]
    salem: bool

    def to_json(self) -> dict:
        return {
            "coeffs": list(self.coeffs),
            "degree": self.degree,
            "multiplicity": self.multiplicity,
            "unitary_roots": self.unitary_roots,
            "reciprocal": self.reciprocal,
            "cyclotomic_index": self.cyclotomic_index,
            "salem": self.salem,
        }


@dataclass(frozen=True)
class ClassificationReport:
    n: int
    char_poly: tuple[int, ...]
    ergodic: bool
    anosov: bool
    dim_center: int
    dim_stable: int
    dim_unstable: int
    factors: tuple[FactorRecord, ...]
    salem_flags: tuple[bool, ...]
    pseudo_anosov: bool

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "char_poly": list(self.char_poly),
            "ergodic": self.ergodic,
            "anosov": self.anosov,
            "dim_center": self.dim_center,
            "dim_stable": self.dim_stable,
            "dim_unstable": self.dim_unstable,
            "factors": [f.to_json() for f in self.factors],
            "salem_flags": list(self.salem_flags),
            "pseudo_anosov": self.pseudo_anosov,
        }


def _cyclotomic_index_of(q: IntPoly) -> Optional[int]:
    for m in cyclotomic_indices_up_to_degree(q.degree):
        if cyclotomic(m) == q:
            return m
    return None


def classify(a: IntMatrix) -> ClassificationReport:
    """Exact algebraic classification of the induced torus automorphism."""
    p = a.char_poly()
    det = p.coeffs[0] * (1 if a.n % 2 == 0 else -1)
    if det not in (1, -1):
        raise OutOfHypothesesError("determinant is not +-1; not a torus automorphism")
    factors = []
    dim_c = dim_s = dim_u = 0
    ergodic = True
    for q, mult in factor_z(p):
        cyc = _cyclotomic_index_of(q)
        if cyc is not None:
            ergodic = False
            u = q.degree
            inside = outside = 0
        else:
            u = count_unitary_roots(q)
            if u:
                inside = outside = (q.degree - u) // 2
            else:
                inside = unit_disk_root_count(q)
                outside = q.degree - inside
        salem = cyc is None and u >= 2 and u == q.degree - 2 and is_reciprocal(q)
        factors.append(
            FactorRecord(
                coeffs=q.coeffs,
                degree=q.degree,
                multiplicity=mult,
                unitary_roots=u,
                reciprocal=is_reciprocal(q),
                cyclotomic_index=cyc,
                salem=salem,
            )
        )
        dim_c += mult * u
        dim_s += mult * inside
        dim_u += mult * outside
    pa = is_irreducible_z(p) and is_poly_in_xm(p) is None
    return ClassificationReport(
        n=a.n,
        char_poly=p.coeffs,
        ergodic=ergodic,
        anosov=(dim_c == 0),
        dim_center=dim_c,
        dim_stable=dim_s,
        dim_unstable=dim_u,
        factors=tuple(factors),
        salem_flags=tuple(f.salem for f in factors),
        pseudo_anosov=pa,
    )


# -- numerical splitting ---------------------------------------------------------


@dataclass
class Splitting:
    """Numerical bases for E^s, E^c, E^u with exactly certified dimensions."""

    matrix: IntMatrix
    dims: tuple[int, int, int]
    basis_s: np.ndarray
    basis_c: np.ndarray
    basis_u: np.ndarray
    block_s: np.ndarray
    block_c: np.ndarray
    block_u: np.ndarray
    eigendata: list[tuple[complex, int, str]]
    char_poly: IntPoly
    basis: np.ndarray = field(init=False)
    coords: np.ndarray = field(init=False)

    def __post_init__(self):
        self.basis = np.hstack([b for b in (self.basis_s, self.basis_c, self.basis_u) if b.size]) \
            if sum(self.dims) else np.zeros((self.matrix.n, 0))
        self.coords = np.linalg.inv(self.basis)

    @property
    def n(self) -> int:
        return self.matrix.n

    def components(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coordinates of x in the (s, c, u) blocks; x has shape (..., n)."""
        c = np.asarray(x) @ self.coords.T
        ds, dc, _ = self.dims
        return c[..., :ds], c[..., ds:ds + dc], c[..., ds + dc:]

    def project(self, x: np.ndarray, flavor: str) -> np.ndarray:
        """Component of x inside the chosen subspace, as a vector in R^n."""
        cs, cc, cu = self.components(x)
        if flavor == "s":
            return cs @ self.basis_s.T
        if flavor == "c":
            return cc @ self.basis_c.T
        if flavor == "u":
            return cu @ self.basis_u.T
        if flavor == "cs":
            return cs @ self.basis_s.T + cc @ self.basis_c.T
        if flavor == "cu":
            return cu @ self.basis_u.T + cc @ self.basis_c.T
        if flavor == "su":
            return cs @ self.basis_s.T + cu @ self.basis_u.T
        raise ValueError(f"unknown flavor {flavor!r}")


def _rotation_basis(a_float: np.ndarray, basis_c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rescale a 2-dim center basis so the induced block is an exact rotation
    with equal-norm (unit) columns."""
    m = np.linalg.lstsq(basis_c, a_float @ basis_c, rcond=None)[0]
    evals, evecs = np.linalg.eig(m)
    i = int(np.argmax(evals.imag))
    if abs(evals[i].imag) < 1e-12:
        raise InvariantError("center block has no complex rotation pair")
    w = evecs[:, i]
    a_vec, b_vec = w.real, -w.imag
    # pick the eigenvector phase that equalizes the two column norms:
    # |a'|^2 - |b'|^2 = alpha cos(2 phi) - beta sin(2 phi) with
    alpha = float(a_vec @ a_vec - b_vec @ b_vec)
    beta = float(2 * a_vec @ b_vec)
    phi = 0.5 * np.arctan2(alpha, beta) if (alpha or beta) else 0.0
    ca, sa = np.cos(phi), np.sin(phi)
    a2 = ca * a_vec - sa * b_vec
    b2 = sa * a_vec + ca * b_vec
    if abs(a2 @ a2 - b2 @ b2) > 1e-9 * max(1.0, float(a2 @ a2)):
        raise InvariantError("failed to equalize center column norms")
    cols = basis_c @ np.column_stack([a2, b2])
    cols /= np.linalg.norm(cols[:, 0])
    mrot = np.linalg.lstsq(cols, a_float @ cols, rcond=None)[0]
    return cols, mrot


def compute_splitting(a: IntMatrix, tol: float = 1e-8) -> Splitting:
    """Invariant splitting with exactly certified dimensions.

    Raises NotErgodicError if some eigenvalue is a root of unity, and
    InvariantError if the numerically sorted Schur dimensions disagree
    with the exact counts.
    """
    p = a.char_poly()
    if not cyclotomic_free(p):
        raise NotErgodicError("an eigenvalue is a root of unity")
    ns, nc, nu = exact_modulus_counts(p)
    # unit-modulus roots must be simple for the rotation construction
    for q, mult in factor_z(p):
        if mult > 1 and count_unitary_roots(q) > 0:
            raise OutOfHypothesesError("repeated unit-modulus eigenvalues")
    af = a.to_float()

    def sorted_basis(select) -> tuple[np.ndarray, int]:
        t, z, sdim = scipy.linalg.schur(af, output="real", sort=select)
        return z[:, :sdim], sdim

    bs, ks = sorted_basis(lambda x, y: x * x + y * y < (1 - tol) ** 2)
    bc, kc = sorted_basis(lambda x, y: abs(np.hypot(x, y) - 1) <= tol)
    bu, ku = sorted_basis(lambda x, y: x * x + y * y > (1 + tol) ** 2)
    if (ks, kc, ku) != (ns, nc, nu):
        raise InvariantError(
            f"numeric Schur dims {(ks, kc, ku)} disagree with exact counts {(ns, nc, nu)}"
        )
    if nc == 2:
        bc, mc = _rotation_basis(af, bc)
    else:
        mc = np.linalg.lstsq(bc, af @ bc, rcond=None)[0] if nc else np.zeros((0, 0))
    ms = np.linalg.lstsq(bs, af @ bs, rcond=None)[0] if ns else np.zeros((0, 0))
    mu = np.linalg.lstsq(bu, af @ bu, rcond=None)[0] if nu else np.zeros((0, 0))

    eigendata: list[tuple[complex, int, str]] = []
    for q, mult in factor_z(p):
        u = count_unitary_roots(q)
        roots = np.roots(list(reversed(q.coeffs)))
        order = np.argsort(np.abs(np.abs(roots) - 1))
        classes = {}
        for idx in order[:u]:
            if abs(abs(roots[idx]) - 1) > 1e-6:
                raise InvariantError("numeric roots disagree with exact unitary count")
            classes[idx] = "center"
        for idx in order[u:]:
            classes[idx] = "stable" if abs(roots[idx]) < 1 else "unstable"
        for idx, root in enumerate(roots):
            eigendata.append((complex(root), mult, classes[idx]))

    sp = Splitting(
        matrix=a,
        dims=(ns, nc, nu),
        basis_s=bs,
        basis_c=bc,
        basis_u=bu,
        block_s=ms,
        block_c=mc,
        block_u=mu,
        eigendata=eigendata,
        char_poly=p,
    )
    for b, m in ((bs, ms), (bc, mc), (bu, mu)):
        if b.size and np.max(np.abs(af @ b - b @ m)) > 1e-9 * max(1.0, np.max(np.abs(af))):
            raise InvariantError("subspace invariance residual too large")
    return sp


# -- adapted norms ----------------------------------------------------------------


@dataclass
class AdaptedNorm:
    """Norm |v| = |v^u| + |v^c| + |v^s| adapting the dynamics.

    The stable factor norm contracts under A by lambda_s < 1, the unstable
    one contracts under A^{-1} by 1/mu_u, and the center norm is preserved
    to rotation accuracy.
    """

    splitting: Splitting
    gram_s: np.ndarray
    gram_c: np.ndarray
    gram_u: np.ndarray
    theta_s: float
    theta_u: float
    lambda_s: float
    mu_u: float
    _chol: dict = field(default_factory=dict)

    def _block_norm(self, coords: np.ndarray, gram: np.ndarray) -> np.ndarray:
        if gram.shape[0] == 0:
            return np.zeros(np.asarray(coords).shape[:-1])
        q = np.einsum("...i,ij,...j->...", coords, gram, coords)
        return np.sqrt(np.maximum(q, 0.0))

    def component_norms(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        cs, cc, cu = self.splitting.components(x)
        return (
            self._block_norm(cs, self.gram_s),
            self._block_norm(cc, self.gram_c),
            self._block_norm(cu, self.gram_u),
        )

    def norm(self, x: np.ndarray) -> np.ndarray:
        a, b, c = self.component_norms(x)
        return a + b + c

    def block_norm(self, coords: np.ndarray, flavor: str) -> np.ndarray:
        gram = {"s": self.gram_s, "c": self.gram_c, "u": self.gram_u}[flavor]
        return self._block_norm(coords, gram)


def _iterate_gram(block: np.ndarray, theta: float, tail: float = 1e-9) -> np.ndarray:
    d = block.shape[0]
    if d == 0:
        return np.zeros((0, 0))
    rho = max(abs(np.linalg.eigvals(block)))
    ratio = rho / theta
    g = np.eye(d)
    term = np.eye(d)
    m_over = block / theta
    j = 0
    while True:
        term = m_over.T @ term @ m_over
        g = g + term
        j += 1
        if np.max(np.abs(term)) < tail or j > 5000:
            break
    return g


def adapted_norm(split: Splitting, theta: Optional[float] = None) -> AdaptedNorm:
    """Build the adapted norm; theta is the stable contraction margin."""
    ns, nc, nu = split.dims
    rho_s = max(abs(np.linalg.eigvals(split.block_s))) if ns else 0.0
    rho_u_inv = max(abs(np.linalg.eigvals(np.linalg.inv(split.block_u)))) if nu else 0.0

    def pick(rho: float, requested: Optional[float]) -> float:
        if requested is not None:
            if not (rho < requested < 1):
                raise ValueError(f"theta must lie in (spectral radius, 1); got {requested}")
            return requested
        t = 1.02 * rho
        return t if t < 1 else rho + 0.5 * (1 - rho)

    theta_s = pick(rho_s, theta) if ns else 0.0
    theta_u = pick(rho_u_inv, theta) if nu else 0.0
    gram_s = _iterate_gram(split.block_s, theta_s) if ns else np.zeros((0, 0))
    gram_u = _iterate_gram(np.linalg.inv(split.block_u), theta_u) if nu else np.zeros((0, 0))
    gram_c = np.eye(nc)

    def factor(block, gram):
        if block.shape[0] == 0:
            return 0.0
        vals = scipy.linalg.eigh(block.T @ gram @ block, gram, eigvals_only=True)
        return float(np.sqrt(max(vals)))

    lam = factor(split.block_s, gram_s)
    muinv = factor(np.linalg.inv(split.block_u), gram_u) if nu else 0.0
    norm = AdaptedNorm(
        splitting=split,
        gram_s=gram_s,
        gram_c=gram_c,
        gram_u=gram_u,
        theta_s=theta_s,
        theta_u=theta_u,
        lambda_s=lam,
        mu_u=1.0 / muinv if muinv else float("inf"),
    )
    if ns and not lam < 1:
        raise InvariantError("stable factor is not a contraction in the adapted norm")
    if nu and not muinv < 1:
        raise InvariantError("unstable factor is not an expansion in the adapted norm")
    return norm
