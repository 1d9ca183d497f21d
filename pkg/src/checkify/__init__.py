"""Analysis workbench for a small logic language with run-time checking of analysis results."""

from .program import (Assertion, Clause, Location, ModeDef, ParseError, Program,
                      UnknownMode, UnknownStatus, programs_equivalent)
from .reader import parse_program, parse_term
from .terms import Atom, Num, Struct, Var
from .writer import format_term, print_program

__version__ = "0.1.0"
