import json

import numpy as np
import pytest

from capillary_orlicz import body as cb
from capillary_orlicz import functionals as fn
from capillary_orlicz import mesh as cm

TH = np.pi / 3


@pytest.fixture(scope="module")
def mesh():
    return cm.build_mesh(2, TH, (32, 64))


def test_unit_cap(mesh):
    K = cb.cap(mesh, 1.0)
    assert np.array_equal(K.h, mesh.ell)
    assert np.allclose(K.u, 1.0, atol=1e-15)


def test_cap_scaling(mesh):
    K = cb.cap(mesh, 2.0)
    assert fn.volume(K) == pytest.approx(5 * np.pi / 3, rel=1e-6)
    assert K.min_eig_W == pytest.approx(2.0, abs=1e-9)
    rep = cb.validate(K)
    assert rep.passed and rep.min_eig_W == pytest.approx(2.0, abs=1e-9)


def test_cap_rejects_nonpositive_radius(mesh):
    with pytest.raises(ValueError):
        cb.cap(mesh, -1.0)
    with pytest.raises(ValueError):
        cb.cap(mesh, 0.0)


def test_translation_group_action(mesh):
    K = cb.cap(mesh, 1.0)
    x = np.array([0.15, -0.1])
    assert np.array_equal(cb.translate_horizontal(K, [0.0, 0.0]).h, K.h)
    back = cb.translate_horizontal(cb.translate_horizontal(K, x), -x)
    assert np.max(np.abs(back.h - K.h)) < 1e-12
    T = cb.translate_horizontal(K, x)
    assert np.max(np.abs(T.W - K.W)) < 1e-7
    assert cb.validate(T).passed


def test_translation_that_leaves_halfspace_is_rejected(mesh):
    with pytest.raises(ValueError):
        cb.translate_horizontal(cb.cap(mesh, 1.0), [5.0, 0.0])


def test_perturbed_cap_is_valid_non_cap(mesh):
    assert np.allclose(cb.perturbed_cap(mesh, "cos2", 0.0).h, mesh.ell)
    K = cb.perturbed_cap(mesh, "cos2", 1e-2)
    rep = cb.validate(K)
    assert rep.passed
    assert rep.robin_residual <= rep.tol_robin
    eig = np.linalg.eigvalsh(K.W)
    assert np.std(eig) > 1e-4  # W is not a multiple of the identity


def test_perturbed_cap_convexity_error(mesh):
    with pytest.raises(cb.ConvexityError) as exc:
        cb.perturbed_cap(mesh, "cos4", 0.8)
    assert exc.value.min_eig < 0


def test_validator_positivity(mesh):
    h = mesh.ell.copy()
    h[5] = -1e-3
    rep = cb.validate(cb.CapillaryBody(mesh, h))
    assert not rep.positive and not rep.passed


def test_validator_locates_robin_fault(mesh):
    h = mesh.ell.copy()
    node = mesh.boundary_ids[7]
    h[node] *= 1.01
    rep = cb.validate(cb.CapillaryBody(mesh, h))
    assert not rep.robin
    assert rep.robin_worst_node == node


def test_evenness_flag(mesh):
    K = cb.translate_horizontal(cb.cap(mesh, 1.0), [0.1, 0.0])
    assert not K.is_even
    assert cb.cap(mesh, 1.0).is_even


def test_body_file_roundtrip(mesh, tmp_path):
    K = cb.perturbed_cap(mesh, "cos2", 0.03)
    path = tmp_path / "k.json"
    cb.save_body(K, path)
    doc = json.loads(path.read_text())
    assert doc["format"] == "capillary-body"
    L = cb.load_body(path)
    assert L.mesh.same_as(mesh)
    assert np.array_equal(L.h, K.h)


def test_body_file_mesh_mismatch(mesh, tmp_path):
    path = tmp_path / "k.json"
    cb.save_body(cb.cap(mesh), path)
    other = cm.build_mesh(2, TH, (16, 32))
    with pytest.raises(ValueError):
        cb.load_body(path, other)


def test_body_rejects_wrong_length(mesh):
    with pytest.raises(ValueError):
        cb.CapillaryBody(mesh, np.ones(3))


def test_n1_cap():
    m = cm.build_mesh(1, TH, 129)
    K = cb.cap(m, 1.5)
    assert cb.validate(K).passed
    assert fn.volume(K) == pytest.approx(1.5**2 * (TH - np.sin(TH) * np.cos(TH)), rel=1e-8)
