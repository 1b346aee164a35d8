"""shiftlab: finite, budgeted computations with multidimensional subshifts."""

from .patterns import PAD, PAD_T, Alphabet, Pattern, Rect, Var
from .presentations import Certificate, Presentation, Verdict

__version__ = "0.1.0"

__all__ = ["PAD", "PAD_T", "Alphabet", "Pattern", "Rect", "Var", "Certificate", "Presentation", "Verdict"]
