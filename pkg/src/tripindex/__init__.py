"""Compressed self-index over trips on a transport network."""
from .corpus import TimeGrid, Trip, TripCorpus, discretize, parse_corpus, sort_trips
from .queryengine import Semantics, TimeInterval, TripIndex, build_index
from .tcsa import TCSA, build_tcsa
from .wmatrix import WaveletMatrix, build_wm
from .bitseq import BitVector, build_bitvector

__all__ = [
    "BitVector", "Semantics", "TCSA", "TimeGrid", "TimeInterval", "Trip", "TripCorpus",
    "TripIndex", "WaveletMatrix", "build_bitvector", "build_index", "build_tcsa", "build_wm",
    "discretize", "parse_corpus", "sort_trips",
]
