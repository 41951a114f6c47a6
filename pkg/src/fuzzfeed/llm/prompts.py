"""Prompt templates for requesting and repairing precondition candidates.

Three prompt kinds exist: the initial request, validity repair (the
candidate admitted a failing input), and weakness repair (the candidate
rejected a succeeding input). Each prompt is self-contained: it embeds the
grammar exactly once, the current program, and, for repairs, the witness
serialized as {"a":[...],"b":[...],"c":[...]}. Rendering is pure.
"""
from __future__ import annotations

from enum import Enum

from ..fuzzing import FuzzInput

GRAMMAR_TEXT = """\
MiniLang: a small deterministic language over 32-bit integer arrays.

program   := funcdef+
funcdef   := ("int" | "bool") IDENT "(" params ")" block
params    := "int[] a, int[] b, int[] c"        (fixed for 'foo' and 'precondition')
block     := "{" stmt* "}"
stmt      := "int" IDENT "=" expr ";"
           | "int[]" IDENT "=" expr ";"
           | IDENT "=" expr ";"
           | IDENT "[" expr "]" "=" expr ";"
           | "while" "(" expr ")" block
           | "for" "(" init ";" expr ";" update ")" block
           | "if" "(" expr ")" block ("else" block)?
           | "sort" "(" IDENT ")" ";"
           | "throw" ";"
           | "return" expr ";"
init      := "int" IDENT "=" expr  |  IDENT "=" expr
update    := IDENT "=" expr
expr      := integer literal | "true" | "false" | IDENT
           | IDENT "[" expr "]" | "len" "(" IDENT ")"
           | "-" expr | "!" expr
           | expr ("+" | "-" | "*" | "/" | "%") expr
           | expr ("<" | "<=" | ">" | ">=" | "==" | "!=") expr
           | expr ("&&" | "||") expr
           | "(" expr ")"
           | "sort" "(" IDENT ")" | "clone" "(" IDENT ")"
           | "binarySearch" "(" IDENT "," expr ")"

Semantics notes:
  - A program defines 'foo' (returning int) and optionally 'precondition'
    (returning bool); no other functions are allowed.
  - All integer arithmetic is 32-bit two's-complement and wraps on overflow
    (2147483647 + 1 == -2147483648); division truncates toward zero;
    division or modulo by zero is a runtime error. Out-of-range integer
    literals wrap to 32 bits.
  - "&&" and "||" short-circuit. Comments run from "//" to end of line.
  - Reading or writing an array outside [0, len) is a runtime error.
  - len(x) is the length of array x. clone(x) returns a copy of x.
    sort(x) sorts x ascending in place (usable as a statement).
    binarySearch(x, v) on an ascending-sorted x returns an index i with
    x[i] == v if v is present, else -(insertion_point) - 1.
  - "throw;" aborts execution with an error; 'foo' returns 0 on success.
  - Every variable must be declared before use; every path through a
    function body must end in "return" or "throw".
"""


class PromptKind(str, Enum):
    INITIAL_WP = "initial-wp"
    REPAIR_VALIDITY = "repair-validity"
    REPAIR_WEAKNESS = "repair-weakness"


_GRAMMAR_BLOCK = (
    "MiniLang is defined by the following grammar:\n\n" + GRAMMAR_TEXT
)

_CLOSING = (
    "Provide no additional explanations beyond the program code and the required\n"
    "comment. Reason through your solution internally."
)

_INITIAL_TEMPLATE = """\
Context: You have the following MiniLang program containing a function named 'foo'.
You must determine the weakest precondition for 'foo' so that:
    - The function's postcondition is always satisfied.
    - No exceptions or errors are reachable.

Task A: Identify this weakest precondition.
Task B: Create a MiniLang function named 'precondition' that checks this
weakest precondition.

Adhere to the following requirements:
    - It must accept the same arguments as 'foo'.
    - It must return 'false' if the precondition is not satisfied and 'true'
    otherwise.
    - It may include a for loop if necessary.
    - Before this function, provide a single brief comment describing the
    precondition in pseudo-code.
    - Integrate this 'precondition' function into the original MiniLang program
    and return the complete updated program.

{grammar}

The program follows:

{program}

Output Format: Return only the updated MiniLang program (do not include any
other additional text), which includes
    - The original 'foo' function - this should be unchanged.
    - The newly added 'precondition' function.

{closing}"""

_REPAIR_VALIDITY_TEMPLATE = """\
You have a MiniLang program that contains:
    - A function called 'foo', which may reach an error state under certain
    inputs.
    - A function called 'precondition', intended to represent the weakest
    precondition for 'foo'.

The current implementation of 'precondition' is incorrect. Specifically, there
is a known set of input values for which 'precondition' returns 'true'
(indicating the precondition is satisfied), but passing these same inputs to
'foo' actually triggers an error state. The aforementioned inputs follow:
{witness}

Task:
    1. Analyze the existing 'foo' function and the incorrect 'precondition'
    function.
    2. Determine why the current 'precondition' function fails to exclude the
    problematic inputs.
    3. Rewrite or adjust 'precondition' so that it correctly represents the
    true weakest precondition for 'foo', ensuring that when 'precondition'
    returns 'true', 'foo' will not reach an error with the same inputs.

Goal:
Provide the corrected 'precondition' function so that 'foo' never encounters
an error when the corrected 'precondition' returns 'true'.

{grammar}

The program follows:

{program}

Output Format: Return only the updated MiniLang program (do not include any
other additional text), which includes
    - The original 'foo' function - this should be unchanged.
    - The corrected 'precondition' function, preceded by a single brief comment
    describing the precondition in pseudo-code.

{closing}"""

_REPAIR_WEAKNESS_TEMPLATE = """\
You have a MiniLang program that contains:
    - A function called 'foo', which may reach an error state under certain
    inputs.
    - A function called 'precondition', intended to represent the weakest
    precondition for 'foo'.

The current implementation of 'precondition' may be too strong. Specifically,
there is a known set of input values for which 'foo' returns successfully and
'precondition' returns 'false' - indicating that the inputs do not satisfy the
given precondition, but still result in a succesful execution of 'foo'. This
implies that the precondition rejects inputs it should accept and therefore
may not be weakest. The aforementioned inputs follow:
{witness}

Task:
    1. Analyze the existing 'foo' function and the overly strong 'precondition'
    function.
    2. Determine why the current 'precondition' function excludes inputs on
    which 'foo' succeeds.
    3. Rewrite or adjust 'precondition' so that it accepts every input on which
    'foo' runs to completion without an error, while still excluding the inputs
    that lead 'foo' to an error state.

Goal:
Provide the corrected 'precondition' function so that it returns 'true' for
every input on which 'foo' executes successfully.

{grammar}

The program follows:

{program}

Output Format: Return only the updated MiniLang program (do not include any
other additional text), which includes
    - The original 'foo' function - this should be unchanged.
    - The corrected 'precondition' function, preceded by a single brief comment
    describing the precondition in pseudo-code.

{closing}"""


def render_initial_prompt(program_source: str) -> str:
    """Initial candidate request for a program that has no precondition."""
    return _INITIAL_TEMPLATE.format(grammar=_GRAMMAR_BLOCK,
                                    program=program_source.strip(),
                                    closing=_CLOSING)


def render_repair_validity_prompt(program_source: str, witness: FuzzInput) -> str:
    """Repair request after a validity counterexample. The program source
    must include the current candidate precondition."""
    return _REPAIR_VALIDITY_TEMPLATE.format(witness=witness.to_json(),
                                            grammar=_GRAMMAR_BLOCK,
                                            program=program_source.strip(),
                                            closing=_CLOSING)


def render_repair_weakness_prompt(program_source: str, witness: FuzzInput) -> str:
    """Repair request after a weakness counterexample."""
    return _REPAIR_WEAKNESS_TEMPLATE.format(witness=witness.to_json(),
                                            grammar=_GRAMMAR_BLOCK,
                                            program=program_source.strip(),
                                            closing=_CLOSING)


def render_prompt(kind: PromptKind, program_source: str,
                  witness: FuzzInput | None = None) -> str:
    if kind is PromptKind.INITIAL_WP:
        return render_initial_prompt(program_source)
    if witness is None:
        raise ValueError(f"{kind.value} prompt needs a witness")
    if kind is PromptKind.REPAIR_VALIDITY:
        return render_repair_validity_prompt(program_source, witness)
    return render_repair_weakness_prompt(program_source, witness)


FORMAT_REMINDER = (
    "Reminder: return only the complete updated MiniLang program as plain "
    "text, with 'foo' unchanged and a 'precondition' function included."
)
