from pathlib import Path

import pytest

from rankarena.bot import PairModel

FIXTURES = Path(__file__).parent / "fixtures"

# Fixed reference weights for the pair ranker: realistic signs and
# magnitudes for tests that need a plausible model without training
# (query-rich, top-similar replacement passages rewarded; removing a
# query-rich source penalized).
REFERENCE_WEIGHTS = {
    "QryTermTarget": 0.189,
    "SimTargetTop(TF.IDF)": 0.134,
    "SimTargetPrevTop(W2V)": 0.138,
    "SimTargetTop(W2V)": 0.085,
    "SimSrcPrevTop(W2V)": 0.084,
    "SimTargetPrecPsg(W2V)": 0.034,
    "SimSrcPrecPsg(W2V)": 0.024,
    "SimSrcTarget(W2V)": 0.015,
    "SimTargetFollowPsg(W2V)": 0.015,
    "SimSrcTop(W2V)": -0.013,
    "SimSrcFollowPsg(W2V)": -0.015,
    "SimSrcPrevTop(TF.IDF)": -0.020,
    "SimTargetPrevTop(TF.IDF)": -0.022,
    "SimSrcTop(TF.IDF)": -0.025,
    "QryTermSrc": -0.073,
}


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8").strip()


@pytest.fixture
def reference_model() -> PairModel:
    return PairModel(weights=dict(REFERENCE_WEIGHTS))


@pytest.fixture
def hoof_original() -> str:
    return fixture_text("hoof_care_original.txt")


@pytest.fixture
def hoof_modified() -> str:
    return fixture_text("hoof_care_modified.txt")


@pytest.fixture
def duplicated_doc_text() -> str:
    return fixture_text("duplicated_sentences.txt")
