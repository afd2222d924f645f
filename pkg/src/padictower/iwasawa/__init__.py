"""Iwasawa-algebra layer: Lambda elements and matrices, sharp/flat limits,
the Perrin-Riou recurrence solver and the rank-bound calculators."""
from .bounds import ddr_check, rank_bound
from .lambda_ring import (
    InexactDivision,
    LambdaElt,
    LambdaMat,
    content_valuation,
    exact_divide,
    omega_n,
    phi_n,
    reduce_mod_phi_content,
)
from .perrin_riou import PRSolution, QuotientRing, pr_solve
from .sharpflat import (
    RecurrenceViolation,
    SharpFlatInput,
    SharpFlatResult,
    backward_step,
    forward_step,
    recurrence_check,
    sharpflat_limit,
    synth_generate,
    telescoping_check,
)
