from .renderer import (
    IMG_SIZE,
    LABEL_NAMES,
    LABEL_THRESHOLDS,
    RENDERER_VERSION,
    RealSample,
    RenderError,
    SynthSample,
    labels_for,
    region_masks,
    render,
)
from .sampling import sample_rotation_rng, sample_scene, sample_scenes, sample_theta, sample_theta_rng
from .perturb import PerturbConfig, perturb_to_real
from .dataset import (
    DatasetError,
    RealDatasetView,
    SynthDatasetView,
    dequantize_image,
    quantize_image,
    read_dataset,
    write_dataset,
)
