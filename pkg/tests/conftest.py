import numpy as np
import pytest

from brushwork.imageio import ColorImage


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_color_image(rng, width, height):
    return ColorImage(pixels=rng.integers(0, 256, size=(height, width, 3),
                                          dtype=np.uint8))


@pytest.fixture
def tiny_corpus(tmp_path_factory):
    """Small two-class corpus (canvas 64, signal scale 16) for pipeline
    tests that need real files but not statistical power."""
    from brushwork.synth import SynthSpec, gen_synth

    out = tmp_path_factory.mktemp("tiny_corpus")
    spec = SynthSpec(canvas=64, count_per_class=4, signal_scale=16, seed=3)
    manifest = gen_synth(spec, out)
    return manifest
