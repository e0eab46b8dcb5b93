"""
Result model for the Kruskal-Wallis test.
"""

from pydantic import BaseModel, ConfigDict, Field


class KWResult(BaseModel):
    """
    Kruskal-Wallis outcome.

    Attributes:
        h: Tie-corrected H statistic (reported as chi-square)
        df: Degrees of freedom, groups - 1
        p: Asymptotic upper-tail probability
        n: Group sizes
        mean_ranks: Mean rank of each group
    """

    model_config = ConfigDict(frozen=True)

    h: float = Field(..., ge=0.0)
    df: int = Field(..., ge=1)
    p: float = Field(..., ge=0.0, le=1.0)
    n: tuple[int, ...] = ()
    mean_ranks: tuple[float, ...] = ()
