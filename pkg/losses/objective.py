"""
Joint training objective.

L_total = L_con + lambda_fre * L_fre + lambda_ue * L_ue, where the content and
frequency terms are summed over the three output scales and the uncertainty
term is the GGD likelihood at full scale.
"""
import logging
from dataclasses import dataclass, field
from typing import Sequence

from pydantic import BaseModel, ConfigDict, Field

from diffcore import Tensor, is_power_of_two, ops
from diffcore.tensor import ShapeError
from ggd import ggd_nll
from model import ModelOutput

logger = logging.getLogger(__name__)


class LossWeights(BaseModel):
    """Weights of the frequency and uncertainty terms."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    lambda_fre: float = Field(default=0.1, ge=0.0)
    lambda_ue: float = Field(default=0.1, ge=0.0)


@dataclass
class LossReport:
    """
    Scalar loss values of one step plus the differentiable objective.

    ``objective`` is the tensor to back-propagate; the float fields are
    detached copies for logging.
    """

    l_con: float
    l_fre: float
    l_ue: float
    l_total: float
    objective: Tensor
    con_per_scale: list[float] = field(default_factory=list)
    fre_per_scale: list[float] = field(default_factory=list)

    def as_record(self) -> dict[str, float]:
        """Ordered fields written to the metrics log."""
        return {"l_con": self.l_con, "l_fre": self.l_fre, "l_ue": self.l_ue, "l_total": self.l_total}


def _check_pyramids(output: Sequence[Tensor], target: Sequence[Tensor], loss: str) -> None:
    if len(output) != len(target):
        raise ShapeError(f"{loss}: output has {len(output)} scales, target has {len(target)}")
    for level, (pred, truth) in enumerate(zip(output, target)):
        if pred.shape != truth.shape:
            raise ShapeError(f"{loss}: scale {level} shape mismatch {pred.shape} vs {truth.shape}")


def _content_terms(output: Sequence[Tensor], target: Sequence[Tensor]) -> list[Tensor]:
    _check_pyramids(output, target, "content_loss")
    return [ops.mean(ops.abs(ops.sub(pred, truth))) for pred, truth in zip(output, target)]


def _frequency_terms(output: Sequence[Tensor], target: Sequence[Tensor]) -> list[Tensor]:
    _check_pyramids(output, target, "frequency_loss")
    terms = []
    for level, (pred, truth) in enumerate(zip(output, target)):
        height, width = pred.shape[2:]
        if not (is_power_of_two(height) and is_power_of_two(width)):
            raise ValueError(f"frequency_loss: scale {level} is {height}x{width}; both sides must be powers of two")
        # DFT is linear, so F(pred) - F(truth) = F(pred - truth)
        spectrum = ops.fft2(ops.sub(pred, truth))
        # Mean over the interleaved real/imag planes counts every bin twice
        terms.append(ops.scale(ops.mean(ops.abs(spectrum)), 2.0))
    return terms


def _total(terms: Sequence[Tensor]) -> Tensor:
    result = terms[0]
    for term in terms[1:]:
        result = ops.add(result, term)
    return result


def content_loss(output: Sequence[Tensor], target: Sequence[Tensor]) -> Tensor:
    """Sum over scales of the mean absolute pixel difference."""
    return _total(_content_terms(output, target))


def frequency_loss(output: Sequence[Tensor], target: Sequence[Tensor]) -> Tensor:
    """
    Sum over scales of the mean L1 spectrum difference.

    The complex L1 of a bin is |real| + |imag|; the mean is taken per pixel and
    channel, so a constant offset c contributes exactly c per scale.

    Raises:
        ValueError: If a scale side is not a power of two
    """
    return _total(_frequency_terms(output, target))


def total_loss(output: ModelOutput, target: Sequence[Tensor], weights: LossWeights | None = None) -> LossReport:
    """
    Weighted joint objective.

    The uncertainty term is zero when the model carries no GGD maps.

    Args:
        output: Forward result
        target: Clean pyramid matching ``output.derained``
        weights: Term weights (default 0.1 and 0.1)
    """
    weights = weights or LossWeights()
    con_terms = _content_terms(output.derained, target)
    fre_terms = _frequency_terms(output.derained, target)
    l_con = _total(con_terms)
    l_fre = _total(fre_terms)

    objective = ops.add(l_con, ops.scale(l_fre, weights.lambda_fre))
    l_ue_value = 0.0
    if output.params is not None:
        l_ue = ggd_nll(output.derained[0], target[0], output.params, reduction="mean")
        objective = ops.add(objective, ops.scale(l_ue, weights.lambda_ue))
        l_ue_value = l_ue.item()

    l_con_value = l_con.item()
    l_fre_value = l_fre.item()
    return LossReport(
        l_con=l_con_value,
        l_fre=l_fre_value,
        l_ue=l_ue_value,
        l_total=l_con_value + weights.lambda_fre * l_fre_value + weights.lambda_ue * l_ue_value,
        objective=objective,
        con_per_scale=[term.item() for term in con_terms],
        fre_per_scale=[term.item() for term in fre_terms],
    )
