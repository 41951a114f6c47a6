"""Weakest-precondition generation for small array programs.

LLM-proposed precondition candidates are checked by two seeded fuzzing
phases (validity: candidate admits a failing input; weakness: candidate
rejects a succeeding input) and repaired through counterexample-carrying
prompts until accepted or out of budget.
"""

__version__ = "0.1.0"
