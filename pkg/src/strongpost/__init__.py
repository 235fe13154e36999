"""Contract strengthening for a small functional language via constrained Horn clauses.

The pipeline: translate a program with catamorphism contracts into Horn
clauses, remove algebraic data types by a fold/unfold transformation, hand
the result to a Horn solver, and read strengthened postconditions back off
the model.
"""

__version__ = "0.1.0"
