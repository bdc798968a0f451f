"""Symbolic expression engine: parse, simplify, differentiate, evaluate."""
from .calculus import depends_on, diff, diff_n, gradient, is_constant
from .dual import DualNumber, dual_evaluate
from .evaluate import DomainError, EvalError, UnboundSymbolError, compile_expr, evaluate
from .nodes import (
    FUNCTIONS,
    MINUS_ONE,
    ONE,
    ZERO,
    Expr,
    ExprError,
    ParseError,
    UnknownFunctionError,
    UnknownIdentifierError,
    as_expr,
    cos,
    exp,
    fn,
    free_symbols,
    log,
    num,
    sin,
    sqrt,
    substitute,
    sym,
    symbols,
)
from .parse import parse
from .printer import to_text
from .sampling import DEFAULT_SEED, SampleSet, SamplingError, sample_points
from .simplify import simplify
from .space import VarSpace

eval_expr = evaluate

__all__ = [
    "FUNCTIONS", "MINUS_ONE", "ONE", "ZERO", "DEFAULT_SEED",
    "Expr", "ExprError", "ParseError", "UnknownFunctionError", "UnknownIdentifierError",
    "EvalError", "DomainError", "UnboundSymbolError", "SamplingError",
    "DualNumber", "SampleSet", "VarSpace",
    "as_expr", "compile_expr", "cos", "depends_on", "diff", "diff_n", "dual_evaluate",
    "eval_expr", "evaluate", "exp", "fn", "free_symbols", "gradient", "is_constant",
    "log", "num", "parse", "sample_points", "simplify", "sin", "sqrt", "substitute",
    "sym", "symbols", "to_text",
]
