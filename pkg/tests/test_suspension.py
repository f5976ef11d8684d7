"""Unit tests for suspensions and the flat Z-cover."""

import math
from fractions import Fraction

import pytest

from zcover.iet import IET, Permutation, Reducible
from zcover.suspension import (
    CoverPoint,
    FlatLoop,
    FlatRay,
    NotClosed,
    SingularityHit,
    UndefinedRay,
    beta_minus_flat,
    beta_plus_flat,
    cylinder_phi_ratio,
    first_return_vertical,
    in_beta_plus_horoball,
    straight_flow,
    suspend,
)


def swap_exact():
    return IET((Fraction(1, 2), Fraction(1, 2)), Permutation((2, 1)))


def quad_3142():
    return IET(
        (Fraction(1, 5), Fraction(3, 10), Fraction(1, 10), Fraction(2, 5)),
        Permutation((3, 1, 4, 2)),
    )


def quad_4321():
    return IET(
        (Fraction(1, 3), Fraction(1, 4), Fraction(1, 5), Fraction(1, 6)),
        Permutation((4, 3, 2, 1)),
    )


def test_swap_is_torus():
    surf = suspend(swap_exact(), Fraction(1))
    assert surf.genus == 1
    assert surf.cone_points == ()
    assert len(surf.marked_points) == 2
    assert all(m.angle_turns == 1 for m in surf.marked_points)
    assert surf.singular_left == frozenset() and surf.singular_right == frozenset()


def test_3142_has_one_six_pi_cone():
    surf = suspend(quad_3142(), Fraction(1))
    assert surf.genus == 2
    assert [c.angle_turns for c in surf.cone_points] == [3]
    assert len(surf.marked_points) == 1


def test_4321_has_two_four_pi_cones():
    surf = suspend(quad_4321(), Fraction(1))
    assert surf.genus == 2
    assert sorted(c.angle_turns for c in surf.cone_points) == [2, 2]


def test_gauss_bonnet_over_a_family():
    for images in ((2, 1), (3, 1, 4, 2), (4, 3, 2, 1), (2, 4, 1, 3), (4, 1, 2, 3)):
        p = len(images)
        lengths = tuple(Fraction(1, k + 2) for k in range(p))
        surf = suspend(IET(lengths, Permutation(images)), Fraction(2))
        excess = sum(c.angle_turns - 1 for c in surf.cone_points)
        assert excess == 2 * surf.genus - 2


def test_suspend_rejects_reducible():
    with pytest.raises(Reducible):
        suspend(IET((Fraction(1, 2), Fraction(1, 2)), Permutation((1, 2))), Fraction(1))
    with pytest.raises(ValueError):
        suspend(swap_exact(), 0)


def test_tau_and_deck():
    surf = suspend(quad_3142(), Fraction(3))
    p = surf.point(Fraction(1, 2), Fraction(1, 3), sheet=2)
    assert surf.tau(p) == Fraction(13, 2)
    assert surf.tau(p.deck(-1)) == surf.tau(p) - 3


def test_first_return_is_the_iet():
    T = quad_3142()
    surf = suspend(T, Fraction(1))
    y = Fraction(13, 101)
    assert first_return_vertical(surf, y) == T.apply(y)


def test_vertical_flow_closes():
    surf = suspend(quad_3142(), Fraction(1))
    p = surf.point(Fraction(1, 3), Fraction(1, 7))
    q = straight_flow(surf, p, math.pi / 2.0, Fraction(1))
    assert (q.sheet, q.x, q.y) == (p.sheet, p.x, p.y)


def test_horizontal_flow_changes_sheet():
    T = quad_3142()
    surf = suspend(T, Fraction(1))
    y = Fraction(5, 101)
    q = straight_flow(surf, surf.point(Fraction(0), y), 0.0, Fraction(5, 2))
    assert q.sheet == 2
    assert q.x == Fraction(1, 2)
    assert q.y == T.apply(T.apply(y))


def test_singularity_hit():
    surf = suspend(quad_3142(), Fraction(1))
    hit_y = min(surf.singular_right)
    with pytest.raises(SingularityHit) as exc:
        straight_flow(surf, surf.point(Fraction(1, 2), hit_y), 0.0, Fraction(1))
    assert exc.value.time == Fraction(1, 2)


def test_beta_plus_finite_on_horizontal_rays():
    surf = suspend(swap_exact(), Fraction(1))
    ray = FlatRay(surf.point(Fraction(1, 3), Fraction(1, 7)), 0.0)
    res = beta_plus_flat(surf, ray, leaf_depth=100)
    assert res.value == float(surf.tau(ray.start))
    assert res.decay_rate == 0.0


def test_beta_plus_deck_equivariance():
    surf = suspend(swap_exact(), Fraction(1))
    base = surf.point(Fraction(1, 3), Fraction(1, 7))
    b0 = beta_plus_flat(surf, FlatRay(base, 0.0), leaf_depth=50).value
    for m in (-2, 1, 3):
        bm = beta_plus_flat(surf, FlatRay(base.deck(m), 0.0), leaf_depth=50).value
        assert abs(bm - (b0 + m * float(surf.roof))) < 1e-12


def test_beta_off_horizontal_decay_rates():
    surf = suspend(swap_exact(), Fraction(1))
    ray = FlatRay(surf.point(Fraction(1, 3), Fraction(1, 7)), 0.7)
    plus = beta_plus_flat(surf, ray)
    minus = beta_minus_flat(surf, ray)
    assert plus.value == float("-inf")
    assert abs(plus.decay_rate - (math.cos(0.7) - 1.0)) < 1e-15
    assert minus.value == float("inf")
    assert abs(minus.decay_rate - (math.cos(0.7) + 1.0)) < 1e-15


def test_beta_minus_finite_backward():
    surf = suspend(swap_exact(), Fraction(1))
    ray = FlatRay(surf.point(Fraction(1, 3), Fraction(1, 7)), math.pi)
    res = beta_minus_flat(surf, ray, leaf_depth=100)
    assert res.value == float(surf.tau(ray.start))


def test_beta_truncated_by_singularity():
    surf = suspend(quad_3142(), Fraction(1))
    # singular heights exist here, so some leaf hits one
    y = min(surf.singular_right)
    ray = FlatRay(surf.point(Fraction(1, 4), y), 0.0)
    res = beta_plus_flat(surf, ray, leaf_depth=100)
    assert res.value == float("-inf")
    assert res.hit is not None


def test_beta_undefined_at_cone_point():
    surf = suspend(quad_3142(), Fraction(1))
    y = min(surf.singular_right)
    with pytest.raises(UndefinedRay):
        beta_plus_flat(surf, FlatRay(CoverPoint(0, surf.roof, y), 0.0))


def test_horoball_membership():
    surf = suspend(swap_exact(), Fraction(1))
    base = FlatRay(surf.point(Fraction(1, 3), Fraction(1, 7)), 0.0)
    higher = FlatRay(surf.point(Fraction(1, 3), Fraction(1, 7), sheet=1), 0.0)
    assert in_beta_plus_horoball(surf, base, higher, leaf_depth=50)
    assert not in_beta_plus_horoball(surf, higher, base, leaf_depth=50)


def test_cylinder_phi_ratio_horizontal():
    surf = suspend(swap_exact(), Fraction(1))
    loop = FlatLoop(surf.point(Fraction(0), Fraction(1, 4)), 0.0, Fraction(2))
    assert cylinder_phi_ratio(surf, loop) == 1.0


def test_cylinder_phi_ratio_vertical():
    surf = suspend(swap_exact(), Fraction(1))
    loop = FlatLoop(surf.point(Fraction(1, 3), Fraction(1, 7)), math.pi / 2.0, Fraction(1))
    assert cylinder_phi_ratio(surf, loop) == 0.0


def test_not_closed():
    surf = suspend(swap_exact(), Fraction(1))
    loop = FlatLoop(surf.point(Fraction(1, 3), Fraction(1, 7)), 0.0, Fraction(1, 2))
    with pytest.raises(NotClosed):
        cylinder_phi_ratio(surf, loop)


def test_float_mode_agrees_with_exact():
    Tq = quad_3142()
    Tf = IET(tuple(float(l) for l in Tq.lengths), Tq.permutation)
    sq = suspend(Tq, Fraction(1))
    sf = suspend(Tf, 1.0)
    assert sf.genus == sq.genus
    assert [c.angle_turns for c in sf.cone_points] == [
        c.angle_turns for c in sq.cone_points
    ]
