"""Shared fixtures: a small synthetic corpus and a tiny model/checkpoint."""

import pathlib

import pytest

from autous.ctu_net import ModelConfig, build_model, save_checkpoint
from autous.video_data import build_fixture_corpus, save_manifest, split_train_test

DATA_DIR = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> pathlib.Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("corpus")


@pytest.fixture(scope="session")
def corpus(corpus_dir):
    """30-clip split corpus (6 per class, 8x32x32), persisted with a manifest."""
    manifest = build_fixture_corpus(
        str(corpus_dir), per_class=6, shape=(8, 32, 32), seed=5
    )
    manifest = split_train_test(manifest, 0.8, seed=7)
    save_manifest(manifest, str(corpus_dir / "manifest.tsv"))
    return manifest


@pytest.fixture(scope="session")
def corpus_manifest_path(corpus, corpus_dir) -> str:
    return str(corpus_dir / "manifest.tsv")


@pytest.fixture(scope="session")
def tiny_config():
    return ModelConfig.tiny(seed=1)


@pytest.fixture(scope="session")
def tiny_model(tiny_config):
    return build_model(tiny_config)


@pytest.fixture(scope="session")
def tiny_checkpoint_path(tiny_model, tmp_path_factory) -> str:
    path = tmp_path_factory.mktemp("ckpt") / "tiny.ckpt"
    save_checkpoint(tiny_model, str(path))
    return str(path)
