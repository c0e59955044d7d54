"""chemtext: corpus pipeline and evaluation toolkit for chemistry-adapted language models.

The package covers the full desk-scale loop for adapting a general-purpose
language model to chemistry text and measuring what happened:

- ``chemtext.corpus``: abstract-corpus cleaning (exact-title dedup) and
  fixed-length token batch packing.
- ``chemtext.bpe``: byte-level BPE tokenizer training, encoding, decoding,
  and a portable JSON model file.
- ``chemtext.instruct``: prompt templates and dataset builders for the five
  chemistry instruction tasks (CEE, CER, MFG, ISG, MWE).
- ``chemtext.scoring``: partial-match NER scoring, edit-distance metrics,
  MAPE, and multiple-choice metrics.
- ``chemtext.harness``: evaluation runner against a text-generation HTTP
  endpoint, with a deterministic mock server for tests.
- ``chemtext.report``: delimited summaries and matplotlib figures from run
  reports.
- ``chemtext.cli``: the ``chemtext`` command-line entry point.
"""

from __future__ import annotations

__version__ = "0.1.0"
