"""Center holonomies of the perturbed map along stable/unstable paths.

The deck holonomy attached to a lattice vector n translates the center
leaf of 0 by n and slides it back along stable then unstable leaves,
read in the chart of W^c(0); at the linear map it is exactly the
translation by the center component of n.  The module also measures
commutation defects and empirical Lipschitz constants of path
holonomies ("C^K L^(K beta)" fits).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .manifolds import LeafSolver


def deck_holonomy(solver: LeafSolver, n_vec: Sequence[int], chart_x: np.ndarray,
                  return_points: bool = False):
    """T_n in the center chart: chart values (..., dim_c) -> (..., dim_c).

    Composition: translate by n, slide along stable leaves onto W^cu(0),
    then along unstable leaves onto W^cs(0); the result lies on W^c(0).
    """
    chart_x = np.atleast_2d(np.asarray(chart_x, dtype=float))
    xhat = solver.center_point(chart_x)
    z = xhat + np.asarray(n_vec, dtype=float)
    zero = np.zeros(solver.n)
    q = solver.intersection_batch(z, zero, ("s", "cu"))
    out = solver.intersection_batch(q, zero, ("u", "cs"))
    charts = solver.center_chart(out)
    if return_points:
        return charts, out
    return charts


def holonomy_step(solver: LeafSolver, points: np.ndarray, target_base: np.ndarray,
                  flavor: str) -> np.ndarray:
    """Holonomy of one s- or u-leg: slide points of a center leaf along
    flavor-leaves onto the center leaf of target_base."""
    if flavor == "s":
        return solver.intersection_batch(points, target_base, ("s", "cu"))
    if flavor == "u":
        return solver.intersection_batch(points, target_base, ("u", "cs"))
    raise ValueError("holonomy legs are 's' or 'u'")


def commutation_defect(
    solver: LeafSolver,
    n_vec: Sequence[int],
    m_vec: Sequence[int],
    sample_count: int = 12,
    seed: int = 0,
    chart_radius: float = 0.5,
) -> float:
    """max over sampled chart points of |T_n(T_m(x)) - T_{n+m}(x)|.

    Zero exactly at the linear map; the defect under perturbations is
    reported and not assumed symmetric in (n, m).
    """
    rng = np.random.default_rng(seed)
    dc = solver.dims[1]
    xs = rng.uniform(-chart_radius, chart_radius, size=(sample_count, dc))
    tm = deck_holonomy(solver, m_vec, xs)
    tn_tm = deck_holonomy(solver, n_vec, tm)
    tnm = deck_holonomy(solver, np.asarray(n_vec) + np.asarray(m_vec), xs)
    return float(np.max(solver.norm.block_norm(tn_tm - tnm, "c")))


@dataclass
class LipschitzProbe:
    c_emp: float
    beta_emp: float
    path_records: list[dict]

    def to_json(self) -> dict:
        return {"c_emp": self.c_emp, "beta_emp": self.beta_emp, "paths": self.path_records}


def _path_lipschitz(solver: LeafSolver, legs: list[tuple[str, np.ndarray]],
                    probes: np.ndarray) -> float:
    """Empirical Lipschitz constant of the holonomy along the given legs."""
    base = np.zeros(solver.n)
    pts = solver.center_point(probes)
    cur_base = base
    for flavor, param in legs:
        new_base = solver.leaf_points(cur_base, flavor, param[None, :])[0]
        pts = holonomy_step(solver, pts, new_base, flavor)
        cur_base = new_base
    # finite differences between consecutive probe points; the chart map is
    # linear, so chart differences measure distances along the center leaf
    ratios = []
    for i in range(0, len(probes) - 1, 2):
        din = solver.norm.block_norm(probes[i + 1] - probes[i], "c")
        dout = solver.norm.block_norm(solver.center_chart(pts[i + 1] - pts[i]), "c")
        ratios.append(float(dout / din))
    return max(ratios)


def holonomy_lipschitz_probe(
    solver: LeafSolver,
    leg_budget: int = 4,
    length_budget: float = 8.0,
    samples: int = 10,
    seed: int = 0,
    probe_step: float = 1e-4,
) -> LipschitzProbe:
    """Random su-paths with at most leg_budget legs and length <= length_budget;
    fits log Lip = K log C + K beta log L over the sampled paths."""
    rng = np.random.default_rng(seed)
    records = []
    for _ in range(samples):
        k = int(rng.integers(1, leg_budget + 1))
        total = float(rng.uniform(0.5, length_budget))
        lengths = rng.dirichlet(np.ones(k)) * total
        legs = []
        for i in range(k):
            flavor = "s" if (i + int(rng.integers(0, 2))) % 2 == 0 else "u"
            d = len(solver.param_indices(flavor))
            direction = rng.standard_normal(d)
            direction /= max(solver.param_norm(flavor, direction), 1e-12)
            legs.append((flavor, direction * lengths[i]))
        dc = solver.dims[1]
        probe_list = []
        for _j in range(3):
            p0 = rng.uniform(-0.4, 0.4, size=dc)
            dirn = rng.standard_normal(dc)
            dirn /= np.linalg.norm(dirn)
            probe_list += [p0, p0 + probe_step * dirn]
        probes = np.array(probe_list)
        lip = _path_lipschitz(solver, legs, probes)
        records.append({"legs": k, "length": max(total, 1.0), "lip": lip})
    # fit the exponent by least squares, then raise the constant to an
    # envelope so Lip <= C^K L^(K beta) covers every sampled path
    a = np.array([[r["legs"], r["legs"] * np.log(r["length"])] for r in records])
    b = np.array([np.log(max(r["lip"], 1e-12)) for r in records])
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)
    beta = float(coef[1])
    log_c = max(
        (np.log(max(r["lip"], 1e-12)) - r["legs"] * beta * np.log(r["length"])) / r["legs"]
        for r in records
    )
    return LipschitzProbe(c_emp=float(np.exp(log_c)), beta_emp=beta,
                          path_records=records)


def deck_lipschitz_fit(
    solver: LeafSolver,
    n_list: Sequence[Sequence[int]],
    seed: int = 0,
    probe_step: float = 1e-4,
    chart_radius: float = 0.4,
) -> dict:
    """Fit Lip(T_n) <= C |n|^beta over the given lattice vectors."""
    rng = np.random.default_rng(seed)
    dc = solver.dims[1]
    lips, norms = [], []
    for n_vec in n_list:
        probe_list = []
        for _ in range(3):
            p0 = rng.uniform(-chart_radius, chart_radius, size=dc)
            d = rng.standard_normal(dc)
            d /= np.linalg.norm(d)
            probe_list += [p0, p0 + probe_step * d]
        probes = np.array(probe_list)
        out = deck_holonomy(solver, n_vec, probes)
        ratio = 0.0
        for i in range(0, len(probes), 2):
            din = solver.norm.block_norm(probes[i + 1] - probes[i], "c")
            dout = solver.norm.block_norm(out[i + 1] - out[i], "c")
            ratio = max(ratio, float(dout / din))
        lips.append(ratio)
        norms.append(float(solver.norm.norm(np.asarray(n_vec, dtype=float))))
    a = np.column_stack([np.ones(len(lips)), np.log(norms)])
    coef, *_ = np.linalg.lstsq(a, np.log(np.maximum(lips, 1e-12)), rcond=None)
    beta = float(coef[1])
    # envelope constant: Lip(T_n) <= c_emp |n|^beta on every sample
    c_env = max(l / nv ** beta for l, nv in zip(lips, norms))
    return {
        "c_emp": float(c_env),
        "beta_emp": beta,
        "lips": [float(v) for v in lips],
        "norms": norms,
    }


def deviation_profile(
    solver: LeafSolver,
    n_list: Sequence[Sequence[int]],
    chart_points: np.ndarray,
) -> list[dict]:
    """sup_x |T_n(x) - (x + n^c)| per n, with |n| in the adapted norm.

    All (n, x) pairs run through one batched holonomy pipeline.
    """
    chart_points = np.atleast_2d(chart_points)
    n_arr = np.asarray(n_list, dtype=float)
    m, b = len(n_arr), len(chart_points)
    xhat = solver.center_point(chart_points)
    z = (xhat[None, :, :] + n_arr[:, None, :]).reshape(m * b, solver.n)
    zero = np.zeros(solver.n)
    q = solver.intersection_batch(z, zero, ("s", "cu"))
    outp = solver.intersection_batch(q, zero, ("u", "cs"))
    charts = solver.center_chart(outp).reshape(m, b, -1)
    ncs = (n_arr @ solver.coords.T)[:, solver.block_idx["c"]]
    devs = solver.norm.block_norm(charts - (chart_points[None, :, :] + ncs[:, None, :]), "c")
    out = []
    for i, n_vec in enumerate(n_list):
        out.append({
            "n": [int(v) for v in n_vec],
            "norm": float(solver.norm.norm(n_arr[i])),
            "deviation": float(np.max(devs[i])),
        })
    return out
