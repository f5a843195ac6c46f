"""Insertion-encoding automata for 4231-avoiding permutations and certified
lower bounds on their growth rate."""

__version__ = "0.1.0"

from .automaton import TransitionMatrix, accepts, build, stats
from .lockmodel import (allowed_letters, count_states, enumerate_states, is_lock_sequence,
                        locked_slots, rank, schroder, step, unrank)
from .permcore import (Letter, avoids_4231, contains, count_avoiders, decode, encode,
                       iter_avoiders, slots_required)
from .spectral import (certify_lower_bound, count_words, extrapolate, lambda_table,
                       power_iteration)
