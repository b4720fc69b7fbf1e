"""Grids, fields, masks, balls, difference operators, and ball norms."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lingrow.grids import (Ball, DirichletGhost, Field, Grid2, Mask,
                           NeumannZero, divergence_adjoint, gradient_forward,
                           lp_on, lp_on_log, sup_on)

from .oracles import naive_ball_integral


def unit_grid(n):
    return Grid2(n, n, 1.0 / n)


# ---------------------------------------------------------------------------
# construction and validation


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid2(1, 4, 0.1)
    with pytest.raises(ValueError):
        Grid2(4, 1, 0.1)
    with pytest.raises(ValueError):
        Grid2(4, 4, 0.0)
    with pytest.raises(ValueError):
        Grid2(2 ** 13, 2 ** 13, 1e-4)  # above the cell cap


def test_grid_geometry():
    g = Grid2(4, 8, 0.25)
    assert g.lx == pytest.approx(1.0)
    assert g.ly == pytest.approx(2.0)
    assert g.cell_count == 32
    assert np.allclose(g.xs(), [0.125, 0.375, 0.625, 0.875])
    assert len(g.xs_ext()) == 6
    assert g.xs_ext()[0] == pytest.approx(-0.125)
    assert g.boundary_distance(0.1, 0.9) == pytest.approx(0.1)


def test_field_validation_and_promotion():
    g = unit_grid(4)
    f = Field(g, np.ones((4, 4)))
    assert f.channels == 1 and f.values.shape == (4, 4, 1)
    with pytest.raises(ValueError):
        Field(g, np.full((4, 4), np.nan))
    with pytest.raises(ValueError):
        Field(g, np.ones((5, 4)))
    f2 = Field.from_function(g, lambda x, y: x + 2 * y)
    assert f2.values[0, 0, 0] == pytest.approx(0.125 + 2 * 0.125)


def test_mask_rules():
    g = unit_grid(4)
    m = Mask.from_rect(g, 0.0, 0.0, 0.5, 0.5)
    assert m.count == 4
    assert m.count + np.sum(~m.member) == g.cell_count
    assert Mask.empty(g).count == 0
    with pytest.raises(ValueError):
        Mask(g, np.ones((4, 4), dtype=bool))  # covering everything


def test_ball_validation():
    with pytest.raises(ValueError):
        Ball((0.5, 0.5), 0.0)
    g = unit_grid(8)
    assert g.contains_ball(Ball((0.5, 0.5), 0.4))
    assert not g.contains_ball(Ball((0.5, 0.5), 0.5))
    assert not g.contains_ball(Ball((0.1, 0.5), 0.2))


# ---------------------------------------------------------------------------
# difference operators


def test_gradient_exact_on_affine_dirichlet():
    g = unit_grid(8)
    fn = lambda x, y: 3.0 * x - 2.0 * y + 0.5
    u = Field.from_function(g, fn)
    ghost = DirichletGhost.from_function(g, fn)
    grad = gradient_forward(u, ghost)
    assert np.max(np.abs(grad[:, :, 0, 0] - 3.0)) <= 1e-12
    assert np.max(np.abs(grad[:, :, 0, 1] + 2.0)) <= 1e-12


def test_gradient_exact_on_affine_neumann_interior():
    g = unit_grid(8)
    u = Field.from_function(g, lambda x, y: x + 2.0 * y)
    grad = gradient_forward(u, NeumannZero())
    # far row/column carries the one-sided zero slots
    assert np.max(np.abs(grad[:-1, :, 0, 0] - 1.0)) <= 1e-12
    assert np.max(np.abs(grad[:, :-1, 0, 1] - 2.0)) <= 1e-12
    assert np.all(grad[-1, :, 0, 0] == 0.0)
    assert np.all(grad[:, -1, 0, 1] == 0.0)


def test_gradient_of_constant_is_zero():
    g = unit_grid(6)
    u = Field.full(g, 4.0)
    assert np.all(gradient_forward(u, NeumannZero()) == 0.0)
    ghost = DirichletGhost.from_function(g, lambda x, y: 4.0)
    assert np.all(gradient_forward(u, ghost) == 0.0)


def test_adjoint_identity_both_rules():
    rng = np.random.default_rng(42)
    g = Grid2(5, 5, 0.2)
    zero_ghost = DirichletGhost.from_field(Field.zeros(g, 2))
    for _ in range(20):
        u = Field(g, rng.normal(size=(5, 5, 2)))
        gf = gradient_forward(u, zero_ghost)
        w = rng.normal(size=gf.shape)
        div = divergence_adjoint(w, g, zero_ghost)
        lhs = float(np.sum(gf * w))
        rhs = -float(np.sum(u.values * div.values))
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)

        u1 = Field(g, rng.normal(size=(5, 5, 1)))
        nz = NeumannZero()
        gf = gradient_forward(u1, nz)
        w = rng.normal(size=gf.shape)
        div = divergence_adjoint(w, g, nz)
        lhs = float(np.sum(gf * w))
        rhs = -float(np.sum(u1.values * div.values))
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


def test_constant_flux_telescopes_to_zero():
    g = Grid2(4, 4, 0.25)
    ghost = DirichletGhost.from_field(Field.zeros(g))
    const = np.ones((5, 5, 1, 2))
    div = divergence_adjoint(const, g, ghost)
    assert np.all(div.values == 0.0)
    # Neumann: interior cells telescope; the far edges carry boundary slots
    nz = NeumannZero()
    const = np.ones((4, 4, 1, 2))
    div = divergence_adjoint(const, g, nz)
    assert np.all(div.values[1:-1, 1:-1, :] == 0.0)


# ---------------------------------------------------------------------------
# ball norms


def test_sup_and_lp_on_zero_field():
    g = unit_grid(16)
    b = Ball((0.5, 0.5), 0.3)
    u = Field.zeros(g)
    assert sup_on(u, b) == 0.0
    assert lp_on(u, b, 1.0) == 0.0


def test_lp_on_constant_matches_discrete_area():
    g = unit_grid(64)
    b = Ball((0.5, 0.5), 0.5 - 1e-9)
    u = Field.full(g, 3.0)
    area = float(np.sum(g.cells_in_ball(b))) * g.h ** 2
    assert abs(area - math.pi * 0.25) <= 3.0 * g.h
    assert lp_on(u, b, 1.0) == pytest.approx(3.0 * area, rel=1e-12)
    assert lp_on(u, b, 1.0) == pytest.approx(
        naive_ball_integral(u, b.center, b.radius, 1.0), rel=1e-12)


def test_sup_of_radial_distance_field():
    g = unit_grid(64)
    b = Ball((0.5, 0.5), 0.4)
    u = Field.from_function(g, lambda x, y: np.hypot(x - 0.5, y - 0.5))
    s = sup_on(u, b)
    assert b.radius - g.h * math.sqrt(2.0) <= s <= b.radius


def test_lp_monotone_in_radius_and_exponent():
    g = unit_grid(32)
    u = Field.from_function(g, lambda x, y: 1.0 + x + y)  # |u| >= 1
    vals = [lp_on(u, Ball((0.5, 0.5), r), 2.0) for r in (0.2, 0.3, 0.4)]
    assert vals[0] < vals[1] < vals[2]
    b = Ball((0.5, 0.5), 0.3)
    assert lp_on(u, b, 1.0) <= lp_on(u, b, 2.0) <= lp_on(u, b, 4.0)


def test_lp_on_log_handles_huge_exponents():
    g = unit_grid(32)
    u = Field.full(g, 1000.0)
    b = Ball((0.5, 0.5), 0.25)
    lg = lp_on_log(u, b, 16.0)
    area = float(np.sum(g.cells_in_ball(b))) * g.h ** 2
    assert lg == pytest.approx(16.0 * math.log(1000.0) + math.log(area),
                               rel=1e-12)
    assert math.isfinite(lg)


def test_ball_errors():
    g = unit_grid(16)
    u = Field.zeros(g)
    with pytest.raises(ValueError):
        sup_on(u, Ball((0.5, 0.5), 0.6))  # sticks out of the domain
    with pytest.raises(ValueError):
        sup_on(u, Ball((0.5, 0.5), 1e-4))  # holds no cell centers
    with pytest.raises(ValueError):
        lp_on(u, Ball((0.5, 0.5), 0.3), 0.0)


def test_lp_matches_naive_oracle_on_random_field():
    rng = np.random.default_rng(9)
    g = unit_grid(24)
    u = Field(g, rng.normal(size=(24, 24, 2)))
    b = Ball((0.4, 0.6), 0.3)
    for p in (1.0, 2.0, 3.5):
        assert lp_on(u, b, p) == pytest.approx(
            naive_ball_integral(u, b.center, b.radius, p), rel=1e-12)


# ---------------------------------------------------------------------------
# property-based checks


@given(st.integers(2, 12), st.integers(2, 12), st.floats(0.01, 2.0))
def test_mask_complement_counts(nx, ny, h):
    g = Grid2(nx, ny, h)
    rng = np.random.default_rng(nx * 31 + ny)
    member = rng.random((nx, ny)) < 0.4
    if member.all():
        member[0, 0] = False
    m = Mask(g, member)
    assert m.count + int(np.sum(~m.member)) == g.cell_count


@given(st.integers(3, 10))
def test_gradient_exact_on_random_affine(n):
    g = unit_grid(n)
    rng = np.random.default_rng(n)
    ax, ay, c = rng.normal(size=3)
    fn = lambda x, y: ax * x + ay * y + c
    u = Field.from_function(g, fn)
    grad = gradient_forward(u, DirichletGhost.from_function(g, fn))
    assert np.max(np.abs(grad[:, :, 0, 0] - ax)) <= 1e-11 * (1.0 + abs(ax))
    assert np.max(np.abs(grad[:, :, 0, 1] - ay)) <= 1e-11 * (1.0 + abs(ay))
