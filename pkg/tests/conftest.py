"""Shared fixtures: prepared fixture corpora and small trained models.

Session-scoped fixtures are shared across tests for speed; tests must
treat them as read-only and ingest their own copies when they need to
mutate dialogues.
"""

from pathlib import Path

import pytest

from da_tagger.experiments import (BEST_ISO, ExperimentConfig, _cfg, prepare,
                                   prepare_all, split_swda)
from da_tagger.svm import TrainConfig
from da_tagger.tagger import ISO_SUBSET, SWDA42, train_tagger
from da_tagger.taxonomy import default_taxonomy

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_config() -> ExperimentConfig:
    return ExperimentConfig.load(FIXTURES / "config.json")


@pytest.fixture(scope="session")
def train_sets(fixture_config):
    return prepare_all(fixture_config,
                       ("SWDA", "AMI", "MAPTASK", "VERBMOBIL", "OASIS"))


@pytest.fixture(scope="session")
def test_sets(fixture_config):
    return prepare_all(fixture_config, ("DIALOGBANK", "CAPC", "SLOGS"))


@pytest.fixture(scope="session")
def all_train(train_sets):
    return [d for c in ("SWDA", "AMI", "MAPTASK", "VERBMOBIL", "OASIS")
            for d in train_sets[c]]


@pytest.fixture(scope="session")
def swda_splits(fixture_config):
    """(train, dev, test) of the unmapped flat-benchmark fixture corpus."""
    loc = fixture_config.corpora["SWDA"]
    dialogues = prepare(loc, default_taxonomy(), mapped=False)
    return split_swda(dialogues, loc.split_file)


@pytest.fixture(scope="session")
def iso_model(all_train):
    return train_tagger(all_train, BEST_ISO, TrainConfig(C=0.1, seed=0),
                        ISO_SUBSET)


@pytest.fixture(scope="session")
def flat_model(swda_splits):
    train, _dev, _test = swda_splits
    return train_tagger(train, _cfg(use_prev_da=True),
                        TrainConfig(C=0.1, seed=0), SWDA42)
