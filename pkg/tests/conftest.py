from __future__ import annotations

from pathlib import Path

import pytest

from cyclescope import Analyzer, build_class_graph, build_fact_table, load_program

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


class Loaded:
    def __init__(self, name: str, with_facts: bool = True, config=None):
        self.text = (CORPUS / f"{name}.oo").read_text()
        self.tp = load_program(self.text)
        self.graph = build_class_graph(self.tp)
        facts_path = CORPUS / f"{name}.facts"
        facts_text = facts_path.read_text() if with_facts and facts_path.exists() else None
        self.facts = build_fact_table(self.tp, self.graph, facts_text)
        self.analyzer = Analyzer(self.tp, self.facts, config, self.graph)


def load_corpus(name: str, with_facts: bool = True, config=None) -> Loaded:
    return Loaded(name, with_facts, config)


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS
