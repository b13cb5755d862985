"""Shared fixtures: canonical synthetic scenes are expensive, so extract
features once per session and share the evaluator across test modules."""
import numpy as np
import pytest

from linecalib.config import PipelineConfig
from linecalib.cloud_features import extract_cloud_features
from linecalib.image_features import extract_image_features
from linecalib.pipeline import build_evaluator
from linecalib.synth import canonical_spec, generate


@pytest.fixture(scope="session")
def canonical_frame():
    """(spec, cloud, lane_mask, pole_mask, gt) for the seed-0 canonical scene."""
    spec = canonical_spec(0)
    cloud, lane_mask, pole_mask, gt = generate(spec)
    return spec, cloud, lane_mask, pole_mask, gt


@pytest.fixture(scope="session")
def canonical_evaluator(canonical_frame):
    """(evaluator, gt) ready for cost/refine tests."""
    spec, cloud, lane_mask, pole_mask, gt = canonical_frame
    cfg = PipelineConfig()
    cf = extract_cloud_features(cloud, seed=cfg.seed, cfg=cfg)
    imf = extract_image_features(lane_mask, pole_mask, cfg)
    return build_evaluator(cf, imf, spec.intrinsics), gt


@pytest.fixture(scope="session")
def canonical_features(canonical_frame):
    spec, cloud, lane_mask, pole_mask, gt = canonical_frame
    cfg = PipelineConfig()
    cf = extract_cloud_features(cloud, seed=cfg.seed, cfg=cfg)
    imf = extract_image_features(lane_mask, pole_mask, cfg)
    return spec, cf, imf, gt


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)
