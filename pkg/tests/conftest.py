import random
from pathlib import Path

import pytest

from slavpipe.conllu import parse_document
from slavpipe.depparse import TreeSchema, save_parser, train_parser
from slavpipe.lemmatizer import save_lemmatizer, train_lemmatizer
from slavpipe.pipeline import model_filename
from slavpipe.tagger import save_tagger, train_tagger

from support import Vocabulary, make_corpus, make_lexicon

FIXTURES = Path(__file__).parent / "fixtures"


def read_fixture(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def nonstandard_doc():
    return parse_document(read_fixture("nonstandard_tokens.conllu"))


@pytest.fixture(scope="session")
def hoce_doc():
    return parse_document(read_fixture("hoce.conllu"))


@pytest.fixture(scope="session")
def single_root_doc():
    return parse_document(read_fixture("tree_single_root.conllu"))


@pytest.fixture(scope="session")
def multi_root_doc():
    return parse_document(read_fixture("tree_multi_root.conllu"))


@pytest.fixture(scope="session")
def reported_speech_text() -> str:
    return read_fixture("reported_speech.txt")


@pytest.fixture(scope="session")
def vocab() -> Vocabulary:
    return Vocabulary(random.Random(11))


@pytest.fixture(scope="session")
def train_doc(vocab):
    return make_corpus(101, 120, vocab, id_prefix="train")


@pytest.fixture(scope="session")
def dev_doc(vocab):
    return make_corpus(102, 30, vocab, id_prefix="dev")


@pytest.fixture(scope="session")
def synthetic_lexicon(vocab):
    return make_lexicon(vocab)


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory, train_doc, dev_doc, synthetic_lexicon):
    """Small models for language ``sl`` trained on the synthetic corpus."""
    out = tmp_path_factory.mktemp("models")
    tagger = train_tagger(train_doc, dev_doc, language="sl")
    save_tagger(tagger, out / model_filename("sl", "standard", "tagger"))
    lemmatizer = train_lemmatizer(train_doc, lexicon=synthetic_lexicon, language="sl")
    save_lemmatizer(lemmatizer, out / model_filename("sl", "standard", "lemmatizer"))
    parser = train_parser(train_doc, TreeSchema.UD, language="sl", epochs=5)
    save_parser(parser, out / model_filename("sl", "standard", "parser"))
    return out
