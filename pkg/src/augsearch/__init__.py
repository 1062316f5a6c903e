"""Automatic data-augmentation policy search for dialogue text.

Core library layout:

* :mod:`augsearch.corpus` / :mod:`augsearch.lexicons` - tokenization, POS
  and stopword lexicons, paraphrase table, morphology pairs.
* :mod:`augsearch.ops` - the 12 semantic-preserving perturbations.
* :mod:`augsearch.policy` - policy grammar, encoding, serialization, corpus
  augmentation.
* :mod:`augsearch.controller` - REINFORCE-trained policy samplers
  (input-agnostic and input-aware).
* :mod:`augsearch.reward` - activity/entity F1 and the weighted reward.
* :mod:`augsearch.harness` - toy target, search loop, baselines.
* :mod:`augsearch.service` / :mod:`augsearch.cli` - FastAPI surface and the
  thin command-line client.
"""

__version__ = "0.1.0"
