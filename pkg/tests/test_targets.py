import numpy as np
import pytest

from artifact import estimates as es
from artifact import geometry as geo
from artifact import roots as rt
from artifact import targets as tgs
from artifact.geometry import ParamMap, Target


def test_plane_grid_layout():
    pts = tgs.plane_grid(-1, 1, 3, -2, 2, 5)
    assert pts.shape == (15, 3)
    assert np.all(pts[:5, 0] == -1) and np.all(pts[:, 1] == 0)
    assert len(tgs.plane_grid(-2, 2, 200, -2, 2, 200)) == 40000


def test_normal_line_distances():
    c = geo.spheroid(1.0, 3.0)
    ds = tgs.log_distances(1e-4, 1e-1, 7)
    pts = tgs.normal_line(c, 0.6, 10 * np.pi / 11, ds)
    g = geo.surface_point(c, 0.6, 10 * np.pi / 11)
    assert np.allclose(np.linalg.norm(pts - g, axis=1), ds)
    assert tgs.inside_spheroid(1, 3, tgs.normal_line(c, 0.6, 0.0, [0.01], "in")).all()
    with pytest.raises(ValueError):
        tgs.normal_line(c, 0.6, 0.0, [0.1], "sideways")


@pytest.mark.parametrize("a,b", [(1.0, 1.0), (1.0, 3.0)])
def test_root_target_roundtrip(a, b):
    for th0 in (1.2 + 0.3j, 0.4 + 0.05j, 2.8 + 0.7j):
        p = tgs.theta_root_target(a, b, th0)
        assert abs(geo.r2_lambda(geo.spheroid(a, b), th0, Target.at(p))) < 1e-12


def test_ring_targets_constant_radius():
    pm = ParamMap(1.0, 2.14)
    pts = tgs.ring_targets(1.0, 1.0, pm, 3.0, 9)
    assert len(pts) >= 5
    for p in pts:
        t0 = rt.nearest_root_in_t(pm, rt.theta0_spheroid_candidates(1.0, 1.0, Target.at(p)))
        assert es.bernstein_radius(t0) <= 3.0 + 1e-9
