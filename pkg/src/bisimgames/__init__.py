"""Codensity bisimilarity toolkit: complete-lattice fibers, observation-based
predicate transformers, greatest fixed points, and the safety games that
characterize them, for finite Kripke frames, Markov chains, DFAs and NFAs."""

__version__ = "0.1.0"
