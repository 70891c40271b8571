"""Differential program corpus."""

from src.corpus.loader import Corpus, CorpusProgram, load_corpus

__all__ = ["Corpus", "CorpusProgram", "load_corpus"]
