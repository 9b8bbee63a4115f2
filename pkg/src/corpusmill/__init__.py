"""Corpus-construction toolkit: execution-feedback code datasets and
adversarially refined function-calling datasets."""

__version__ = "0.1.0"
