import math
import os

import numpy as np
import pytest

import vgan

TINY = """
[dataset]
source = synthetic
resolution = 8
count = 24
synthetic_seed = 3
[camera]
fov = 40
range_depth = 0.5, 1.5
steps = 4
range_h = pi/2 +- 0.5
range_v = pi/2 +- 0.3
ray_res = 4
[mapping]
latent_dim = 4
width = 8
depth = 2
[structural]
template_channels = 3
template_res = 2
stage_channels = 3
[field]
hidden = 6
layers = 2
feature_dim = 4
gamma0 = 3
[renderer]
stage_channels = 3
torgb_kernel = 3
[discriminator]
max_res = 8
base_channels = 4
max_channels = 8
[train]
batch = 4
lambda = 1
schedule = 4:0.024, 8:0.04
seed = 3
"""


def test_presets_listed_and_valid():
    names = vgan.presets()
    for name in ["celeba", "cat", "carla", "ffhq", "compcars", "bedroom", "desk"]:
        assert name in names
        vgan.validate_config(vgan.preset_text(name))


def test_config_errors_raise():
    with pytest.raises(vgan.ConfigError):
        vgan.validate_config("[camera]\nzoom = 3\n")
    with pytest.raises(vgan.VganError):
        vgan.validate_config("[train]\nbatch = 0\n")
    assert vgan.evaluate_expression("pi/2 + 0.25") == pytest.approx(math.pi / 2 + 0.25)


def test_accumulate_hand_case_and_identity():
    feature, weights = vgan.accumulate(np.ones(2), np.full(2, 0.5), np.array([[1.0], [3.0]]))
    assert weights == pytest.approx([0.393469, 0.238651], abs=1e-6)
    assert feature[0] == pytest.approx(0.393469 + 3 * 0.238651, abs=1e-5)

    rng = np.random.default_rng(0)
    sigma = rng.uniform(0, 4, size=(50, 16))
    delta = rng.uniform(0.01, 0.3, size=(50, 16))
    _, w = vgan.accumulate(sigma, delta, rng.normal(size=(50, 16, 2)))
    np.testing.assert_allclose(w.sum(axis=1), 1 - np.exp(-(sigma * delta).sum(axis=1)), atol=1e-12)


def test_frechet_distance_one_dimensional():
    x = np.array([[1.0], [2.0], [4.0], [7.0]])
    y = np.array([[-1.0], [0.5], [3.0]])
    expected = (x.mean() - y.mean()) ** 2 + (x.std(ddof=1) - y.std(ddof=1)) ** 2
    assert vgan.frechet_distance(x, y) == pytest.approx(expected, abs=1e-10)
    with pytest.raises(ValueError):
        vgan.frechet_distance(np.zeros(3), np.zeros(3))


def test_marching_cubes_ball():
    n = 48
    c = np.linspace(-1, 1, n)
    zz, yy, xx = np.meshgrid(c, c, c, indexing="ij")
    field = np.where(np.sqrt(xx**2 + yy**2 + zz**2) < 0.5, 20.0, 0.0)
    verts, faces = vgan.marching_cubes(field, 10.0)
    assert len(faces) > 0
    assert np.abs(np.linalg.norm(verts, axis=1) - 0.5).max() < 2 * (2 / (n - 1))
    assert faces.max() < len(verts)
    empty_v, empty_f = vgan.marching_cubes(np.zeros((8, 8, 8)))
    assert len(empty_v) == 0 and len(empty_f) == 0


def test_generator_render_and_invariants():
    g = vgan.Generator(TINY, seed=1)
    assert g.output_res == 8
    z = g.sample_latent(1, seed=4)
    a = g.render(z, yaw=0.1, pitch=0.05)
    assert a["image"].shape == (1, 3, 8, 8)
    b = g.render(z, yaw=0.1, pitch=0.05)
    assert np.array_equal(a["image"], b["image"])

    other = g.sample_latent(1, seed=5)
    swapped = g.render(z, yaw=0.1, pitch=0.05, z_renderer=other)
    assert np.array_equal(a["feature_map"], swapped["feature_map"])
    assert np.array_equal(a["sigma"], swapped["sigma"])
    assert not np.array_equal(a["image"], swapped["image"])

    pts = np.random.default_rng(1).uniform(-1, 1, size=(100, 3))
    assert np.array_equal(g.density(z, pts), g.density(z, pts, z_renderer=other))
    assert (g.density(z, pts) >= 0).all()


def test_training_steps_and_checkpoint(tmp_path):
    t = vgan.Trainer(TINY)
    losses = [t.step() for _ in range(6)]
    assert all(math.isfinite(r["d_loss"]) and math.isfinite(r["g_loss"]) for r in losses)
    assert t.finite()
    path = str(tmp_path / "six.vgan")
    t.save(path)

    resumed = vgan.Trainer(TINY)
    resumed.load(path)
    assert resumed.steps == 6
    assert resumed.step() == t.step()

    g = vgan.Generator(TINY, checkpoint=path)
    assert g.render(g.sample_latent(2))["image"].shape == (2, 3, 8, 8)
    with pytest.raises(vgan.CheckpointError):
        vgan.Generator(TINY.replace("lambda = 1", "lambda = 0.5"), checkpoint=path)


@pytest.mark.skipif(not os.environ.get("VGAN_SOURCE_DIR"), reason="needs the source tree")
def test_shipped_config_files_validate():
    root = os.path.join(os.environ["VGAN_SOURCE_DIR"], "configs")
    for name in sorted(os.listdir(root)):
        with open(os.path.join(root, name)) as fh:
            vgan.validate_config(fh.read())
