import pytest
from pathlib import Path

from ink import corpus, pyfqn, tokvocab

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def corpus_roots() -> list[Path]:
    return [FIXTURES / "mini_corpus" / "repo_alpha",
            FIXTURES / "mini_corpus" / "repo_beta"]


@pytest.fixture(scope="session")
def manifest(corpus_roots):
    return corpus.ingest_corpus(corpus_roots)


@pytest.fixture(scope="session")
def resolved(manifest):
    return [pyfqn.resolve_unit(u) for u in manifest.units]


@pytest.fixture(scope="session")
def usages(resolved):
    return [u for ru in resolved for u in ru.usages]


@pytest.fixture(scope="session")
def profiles():
    return tokvocab.load_profiles(FIXTURES / "profiles")


@pytest.fixture(scope="session")
def alpha(profiles):
    return next(p for p in profiles if p.model_id == "alpha-bpe")


@pytest.fixture(scope="session")
def beta(profiles):
    return next(p for p in profiles if p.model_id == "beta-bpe")


@pytest.fixture(scope="session")
def uvocab(profiles):
    return tokvocab.build_unified_vocab(profiles)
