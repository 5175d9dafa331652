from importlib import resources

import pytest

from ltyn.lexicon import load_lexicon_file

DATA = resources.files("ltyn") / "data"
CORPUS = DATA / "corpus"


@pytest.fixture(scope="session")
def demo():
    return load_lexicon_file(DATA / "demo.lex")


@pytest.fixture(scope="session")
def montague():
    return load_lexicon_file(DATA / "montague.lex")
