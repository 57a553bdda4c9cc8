import numpy as np
import pytest

from torusdyn.errors import NumericsError
from torusdyn.winding import winding_number, winding_number_2d


def circle(n=24, r=1.0, center=(0.0, 0.0)):
    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return np.column_stack([center[0] + r * np.cos(th), center[1] + r * np.sin(th)])


def test_circle_winds_once():
    assert winding_number_2d(circle()) == 1
    assert winding_number_2d(circle()[::-1]) == -1


def test_point_outside_winds_zero():
    assert winding_number_2d(circle(center=(5, 0))) == 0


def test_coarse_square_refines():
    sq = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
    assert winding_number_2d(sq) == 1


def test_double_loop():
    th = np.linspace(0, 4 * np.pi, 64, endpoint=False)
    pts = np.column_stack([np.cos(th), np.sin(th)])
    assert winding_number_2d(pts) == 2


def test_concatenation_additivity():
    a = circle(16)
    assert winding_number_2d(np.vstack([a, a])) == 2
    assert winding_number_2d(np.vstack([a, a[::-1]])) == 0


def test_center_on_curve_raises():
    with pytest.raises(NumericsError):
        winding_number_2d(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))


def test_jordan_unbounded_complement_suite():
    """Loops avoiding unions of unbounded half-strips wind zero around every
    strip point; a loop around a bounded obstacle winds nonzero."""
    # complement pieces: right half-strip {x >= 2, |y| <= 1/2} and the upper
    # half-strip {y >= 2, |x| <= 1/2}; the unit circle avoids both
    loop = circle(32, r=1.0)
    for strip_point in ([3.0, 0.0], [2.0, 0.25], [0.0, 3.0], [0.25, 2.5], [10.0, 0.0]):
        assert winding_number_2d(loop, strip_point) == 0
    # bounded obstacle: the unit square at the origin, loop of radius 3
    big = circle(48, r=3.0)
    for inside_point in ([0.0, 0.0], [0.3, -0.2]):
        assert winding_number_2d(big, inside_point) != 0


def test_winding_in_center_chart(salem_split):
    y = np.array([0.2, 0.1, 0.3, -0.1])
    th = np.linspace(0, 2 * np.pi, 32, endpoint=False)
    plane = np.column_stack([np.cos(th), np.sin(th)])
    curve = y + plane @ salem_split.basis_c.T
    assert winding_number(curve, y, salem_split) == 1
    # constant center component: winding zero
    s_dir = salem_split.basis_s[:, 0]
    wobble = y + salem_split.basis_c[:, 0][None, :] + np.outer(np.sin(th), s_dir)
    assert winding_number(wobble, y, salem_split) == 0


def test_winding_homotopy_invariance(salem_split):
    # perturbations smaller than the center distance never change the degree
    rng = np.random.default_rng(3)
    y = np.zeros(4)
    th = np.linspace(0, 2 * np.pi, 48, endpoint=False)
    base = np.column_stack([2 * np.cos(th), 2 * np.sin(th)]) @ salem_split.basis_c.T
    w0 = winding_number(base, y, salem_split)
    rel = base - y
    _, cc, _ = salem_split.components(rel)
    margin = np.min(np.hypot(cc[:, 0], cc[:, 1]))
    bump = rng.normal(size=base.shape)
    bump *= 0.4 * margin / np.max(np.abs(bump))
    assert winding_number(base + bump, y, salem_split) == w0


def test_curve_touching_su_space_raises(salem_split):
    y = np.zeros(4)
    s_dir = salem_split.basis_s[:, 0]
    th = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    curve = np.outer(np.sin(th), s_dir)  # center component identically zero
    with pytest.raises(NumericsError):
        winding_number(curve, y, salem_split)
