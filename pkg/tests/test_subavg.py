import json

import numpy as np
import pytest

from levi.errors import HypothesisViolated, NotAGraph, NotAGroup, ParseError, UnknownIsometry
from levi.subavg import (EPSILON_LIMIT, AmbientSpace, DiscretizedSubmanifold, average_submanifold,
                         c1_distance, cyclic_rotations, express_as_section, invariance_defect,
                         load_submanifold, translate)

R2 = AmbientSpace("R", 2)
REFLECT = np.diag([1.0, -1.0])


def circle(center=(0.0, 0.0), radius=1.0):
    return lambda th: np.array([center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)])


def curve(fn, samples=64, ambient=R2):
    return DiscretizedSubmanifold.from_function(ambient, fn, samples)


def latitude(z, wobble=0.0):
    return lambda th: np.array([np.sqrt(1 - z * z) * np.cos(th), np.sqrt(1 - z * z) * np.sin(th),
                                z + wobble * np.cos(3 * th)])


# -- ambient spaces --------------------------------------------------------------


def test_group_must_close():
    with pytest.raises(NotAGroup):
        AmbientSpace("R", 2, [np.eye(2), cyclic_rotations(4)[1]])


def test_isometries_must_be_orthogonal():
    with pytest.raises(ValueError):
        AmbientSpace("R", 2, [np.eye(2), np.diag([2.0, 1.0])])


def test_euclidean_group_with_translations():
    # reflection across the line x = 1
    Q, t = np.diag([-1.0, 1.0]), np.array([2.0, 0.0])
    A = AmbientSpace("R", 2, [(np.eye(2), np.zeros(2)), (Q, t)])
    N = curve(circle((1.0, 0.0)))
    assert invariance_defect(N, A) < 1e-13


# -- frames ------------------------------------------------------------------------


def test_frames_orthonormal_and_tangent():
    N = curve(circle(radius=2.0))
    assert N.frame_residual() <= 1e-12
    assert N.tangency_residual() < N.mesh_size()


def test_unorthonormal_frame_rejected():
    N = curve(circle())
    with pytest.raises(ValueError):
        DiscretizedSubmanifold(N.points, N.frames * 1.1, "closed-curve")


# -- express_as_section ----------------------------------------------------------------


def test_section_of_self_is_zero():
    N = curve(circle())
    assert np.abs(express_as_section(N, N, R2).values).max() < 1e-14


def test_concentric_section():
    N, M = curve(circle()), curve(circle(radius=1.1))
    s = express_as_section(N, M, R2)
    assert np.allclose(s.norms(), 0.1, atol=1e-12)
    assert np.allclose(s.values, 0.1 * N.points, atol=1e-12)


def test_ellipse_section():
    N = curve(circle())
    E = curve(lambda th: np.array([1.05 * np.cos(th), np.sin(th)]))
    s = express_as_section(N, E, R2)
    assert s.norms().max() == pytest.approx(0.05, abs=1e-12)
    assert s.norms()[0] == pytest.approx(0.05, abs=1e-12)
    assert s.norms()[16] < 1e-12
    # dense nearest-intersection oracle: ray from (cos t, sin t) hits the ellipse at radius r(t)
    t = 2 * np.pi * np.arange(64) / 64
    r = 1 / np.sqrt((np.cos(t) / 1.05) ** 2 + np.sin(t) ** 2)
    assert np.allclose(s.norms(), r - 1, atol=1e-12)


def test_section_values_are_normal():
    N = curve(circle())
    s = express_as_section(N, curve(circle((0.02, 0.01))), R2)
    assert np.abs(np.einsum("id,id->i", s.values, N.frames[:, 0, :])).max() <= 1e-12


def test_not_a_graph():
    N = curve(circle())
    with pytest.raises(NotAGraph):
        express_as_section(N, curve(circle((5.0, 0.0))), R2)


# -- c1_distance -------------------------------------------------------------------


def test_distance_to_self():
    N = curve(circle())
    assert c1_distance(N, N, R2) < 1e-13


def test_distance_concentric():
    assert c1_distance(curve(circle()), curve(circle(radius=1.01)), R2) == pytest.approx(0.01, abs=1e-6)


def test_distance_translated():
    d = 0.01
    value = c1_distance(curve(circle()), curve(circle((d, 0.0))), R2)
    assert d * (1 - 1e-3) <= value <= d * 1.51


def test_distance_direction_consistency():
    N, M = curve(circle()), curve(circle((0.01, 0.0)))
    assert abs(c1_distance(N, M, R2) - c1_distance(M, N, R2)) <= N.mesh_size()


def test_mesh_refinement():
    values = []
    for samples in (16, 32, 64):
        N = curve(circle(), samples)
        values.append((c1_distance(N, curve(circle((0.01, 0.0)), samples), R2), N.mesh_size()))
    for (d1, h), (d2, _) in zip(values, values[1:]):
        assert abs(d1 - d2) <= h ** 2


def test_sphere_latitude_distance():
    S = AmbientSpace("S", 2)
    value = c1_distance(curve(latitude(0.3), ambient=S), curve(latitude(0.31), ambient=S), S)
    assert value == pytest.approx(np.arcsin(0.31) - np.arcsin(0.3), abs=1e-12)


def test_patch_distances():
    R3 = AmbientSpace("R", 3)
    u = np.linspace(-1, 1, 9)
    U, V = np.meshgrid(u, u, indexing="ij")
    flat = DiscretizedSubmanifold.from_grid(np.stack([U, V, 0 * U], -1))
    lifted = DiscretizedSubmanifold.from_grid(np.stack([U, V, 0.01 + 0 * U], -1))
    tilted = DiscretizedSubmanifold.from_grid(np.stack([U, V, 0.005 * U], -1))
    assert c1_distance(flat, lifted, R3) == pytest.approx(0.01, abs=1e-14)
    per = c1_distance(flat, tilted, R3, per_sample=True)
    assert per.max() == pytest.approx(0.005, abs=1e-12)
    # at the centre the length vanishes and only the tilt angle remains
    assert per[40] == pytest.approx(np.arctan(0.005), abs=1e-12)


# -- translate ---------------------------------------------------------------------


def test_translate_identity_and_reflection():
    A = AmbientSpace("R", 2, [np.eye(2), REFLECT])
    N = curve(circle((0.0, 0.2)))
    assert np.array_equal(translate(N, 0, A).points, N.points)
    image = translate(N, 1, A)
    assert np.allclose(image.points.mean(axis=0), [0.0, -0.2], atol=1e-14)
    assert image.frame_residual() <= 1e-12


def test_translate_composition():
    A = AmbientSpace("R", 2, cyclic_rotations(4))
    N = curve(lambda th: np.array([1.2 * np.cos(th), np.sin(th) + 0.1]))
    g, h = 1, 2
    Q = A.isometries
    hg = A.index_of((Q[h][0] @ Q[g][0], Q[h][0] @ Q[g][1] + Q[h][1]))
    lhs = translate(translate(N, g, A), h, A)
    rhs = translate(N, hg, A)
    assert np.allclose(lhs.points, rhs.points, atol=1e-14)


def test_unknown_isometry():
    A = AmbientSpace("R", 2, [np.eye(2), REFLECT])
    with pytest.raises(UnknownIsometry):
        translate(curve(circle()), cyclic_rotations(4)[1], A)


# -- averaging -----------------------------------------------------------------------


def test_already_invariant():
    A = AmbientSpace("R", 2, cyclic_rotations(4))
    N = curve(circle())
    res = average_submanifold(N, A)
    assert res.iterations == 0
    assert np.array_equal(res.result.points, N.points)


def test_reflection_circle():
    A = AmbientSpace("R", 2, [np.eye(2), REFLECT])
    delta = 2e-5
    N = curve(circle((0.0, delta)))
    res = average_submanifold(N, A)
    assert res.hypothesis_holds
    assert res.residual < 1e-10
    assert invariance_defect(res.result, A) < 1e-10
    assert np.abs(np.linalg.norm(res.result.points, axis=1) - 1).max() < 1e-8
    assert res.distance == pytest.approx(delta, rel=1e-3)
    assert res.distance <= 136 * np.sqrt(res.epsilon)


def test_c4_wobble_needs_force():
    A = AmbientSpace("R", 2, cyclic_rotations(4))
    a = 1e-5
    N = curve(lambda th: (1 + a * np.cos(3 * th)) * np.array([np.cos(th), np.sin(th)]))
    # the slope 3a of the wobble puts eps at 6a, just over 1/20000
    assert invariance_defect(N, A) >= EPSILON_LIMIT
    with pytest.raises(HypothesisViolated):
        average_submanifold(N, A)
    res = average_submanifold(N, A, force=True)
    assert res.residual < 1e-10
    assert res.distance <= 136 * np.sqrt(res.epsilon)


def test_sphere_averaging():
    S = AmbientSpace("S", 2, cyclic_rotations(4, dim=3))
    N = curve(latitude(0.3, 1e-6), ambient=S)
    res = average_submanifold(N, S)
    assert res.residual < 1e-10
    assert np.allclose(np.linalg.norm(res.result.points, axis=1), 1, atol=1e-14)
    assert res.distance <= 136 * np.sqrt(res.epsilon)


def test_averaging_equivariance():
    A = AmbientSpace("R", 2, [np.eye(2), REFLECT])
    N = curve(lambda th: np.array([np.cos(th) + 3e-6 * np.sin(2 * th), np.sin(th) + 5e-6]))
    lhs = average_submanifold(translate(N, 1, A), A).result
    rhs = translate(average_submanifold(N, A).result, 1, A)
    assert np.abs(lhs.points - rhs.points).max() < 1e-9


# -- file formats ---------------------------------------------------------------------


def test_csv_round_trip_with_sidecar():
    A = AmbientSpace("R", 2, [np.eye(2), REFLECT])
    N = curve(circle((0.0, 0.1)), 32)
    sidecar = {**A.to_json(), "topology": "closed-curve"}
    M, B = load_submanifold(N.to_csv(), json.dumps(sidecar))
    assert np.array_equal(M.points, N.points) and np.array_equal(M.frames, N.frames)
    assert len(B) == 2


def test_csv_sidecar_with_bare_matrices():
    sidecar = {"ambient": {"kind": "R", "dim": 2}, "topology": "closed-curve",
               "group": [np.eye(2).tolist(), REFLECT.tolist()]}
    _, A = load_submanifold(curve(circle(), 16).to_csv(), sidecar)
    assert len(A) == 2


def test_csv_column_count_checked():
    text = curve(circle(), 8).to_csv()
    broken = "\n".join(",".join(line.split(",")[:-1]) for line in text.strip().splitlines())
    with pytest.raises(ParseError):
        load_submanifold(broken, {"ambient": {"kind": "R", "dim": 2}, "topology": "closed-curve"})
