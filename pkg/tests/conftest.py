from pathlib import Path

import pytest

from prereqchain.corpus import ingest_documents
from prereqchain.embed import EmbedConfig, train_pvdm

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def annotation_dir():
    return FIXTURES / "annotation"

@pytest.fixture(scope="session")
def fig1_dir():
    return FIXTURES / "fig1"


@pytest.fixture(scope="session")
def taxonomy_topics():
    path = FIXTURES / "taxonomy" / "taxonomy_topics.txt"
    return [line for line in path.read_text().splitlines() if line.strip()]


@pytest.fixture(scope="session")
def mini_docset():
    return ingest_documents(FIXTURES / "corpus_mini")


@pytest.fixture(scope="session")
def mini_model(mini_docset):
    # small but real: enough training for inference checks to be meaningful
    cfg = EmbedConfig(dim=16, window=4, epochs=40, negative_samples=5,
                      learning_rate=0.05, min_count=2, seed=11)
    return train_pvdm(mini_docset, cfg)
